//! Dynamic dominance counting.
//!
//! Points are kept in a binary-counter family of static blocks (block `i`
//! holds `2^i` points or is empty). Each block is sorted by x and stores the
//! y-ranks of that sequence in a wavelet matrix, so a closed-quadrant count
//! costs `O(log n)` per block. Deletions go into a second family of blocks
//! holding tombstones whose counts are subtracted; both families are rebuilt
//! from scratch once tombstones outnumber half the live points.
//!
//! Query and amortized update cost are `O(log^2 n)`.

use std::collections::HashSet;

use thiserror::Error;

use crate::geometry::Coord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterError {
    #[error("point {0} is already stored")]
    Duplicate(Coord),
    #[error("point {0} is not stored")]
    Absent(Coord),
}

#[derive(Debug, Clone)]
struct RankBits {
    words: Vec<u64>,
    // ones before each word
    before: Vec<u32>,
}

impl RankBits {
    fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len() / 64 + 1];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        let mut before = Vec::with_capacity(words.len());
        let mut acc = 0u32;
        for w in &words {
            before.push(acc);
            acc += w.count_ones();
        }
        RankBits { words, before }
    }

    #[inline]
    fn rank0(&self, i: usize) -> usize {
        let w = i / 64;
        let mask = (1u64 << (i % 64)) - 1;
        let ones = self.before[w] as usize + (self.words[w] & mask).count_ones() as usize;
        i - ones
    }
}

/// Wavelet matrix over small non-negative integers.
#[derive(Debug, Clone)]
struct WaveletMatrix {
    levels: Vec<(RankBits, usize)>,
    bits: u32,
}

impl WaveletMatrix {
    fn new(values: &[u32], alphabet: u32) -> Self {
        let bits = (32 - alphabet.saturating_sub(1).leading_zeros()).max(1);
        let mut cur = values.to_vec();
        let mut levels = Vec::with_capacity(bits as usize);
        for lvl in (0..bits).rev() {
            let flags: Vec<bool> = cur.iter().map(|v| (v >> lvl) & 1 == 1).collect();
            let zeros = flags.iter().filter(|b| !**b).count();
            let mut next = Vec::with_capacity(cur.len());
            next.extend(cur.iter().filter(|v| (*v >> lvl) & 1 == 0));
            next.extend(cur.iter().filter(|v| (*v >> lvl) & 1 == 1));
            levels.push((RankBits::from_bits(&flags), zeros));
            cur = next;
        }
        WaveletMatrix { levels, bits }
    }

    /// Number of positions in `[l, r)` holding a value `< t`.
    fn count_less(&self, mut l: usize, mut r: usize, t: u32) -> usize {
        if u64::from(t) >= 1u64 << self.bits {
            return r - l;
        }
        let mut res = 0;
        for (depth, (bv, zeros)) in self.levels.iter().enumerate() {
            let shift = self.bits - 1 - depth as u32;
            let l0 = bv.rank0(l);
            let r0 = bv.rank0(r);
            if (t >> shift) & 1 == 1 {
                res += r0 - l0;
                l = zeros + (l - l0);
                r = zeros + (r - r0);
            } else {
                l = l0;
                r = r0;
            }
        }
        res
    }
}

#[derive(Debug, Clone)]
struct Block {
    // sorted by (x, y)
    points: Vec<Coord>,
    distinct_y: Vec<i64>,
    ranks: WaveletMatrix,
}

impl Block {
    fn build(mut points: Vec<Coord>) -> Self {
        points.sort_unstable_by_key(|c| (c.x, c.y));
        let mut distinct_y: Vec<i64> = points.iter().map(|c| c.y).collect();
        distinct_y.sort_unstable();
        distinct_y.dedup();
        let ranks: Vec<u32> = points
            .iter()
            .map(|c| distinct_y.partition_point(|&y| y < c.y) as u32)
            .collect();
        let ranks = WaveletMatrix::new(&ranks, distinct_y.len() as u32);
        Block {
            points,
            distinct_y,
            ranks,
        }
    }

    /// `#{q : q.x >= p.x && q.y >= p.y}`
    fn quadrant(&self, p: Coord) -> usize {
        let start = self.points.partition_point(|c| c.x < p.x);
        let n = self.points.len();
        if start == n {
            return 0;
        }
        let t = self.distinct_y.partition_point(|&y| y < p.y) as u32;
        (n - start) - self.ranks.count_less(start, n, t)
    }
}

#[derive(Debug, Clone, Default)]
struct BlockFamily {
    blocks: Vec<Option<Block>>,
    len: usize,
}

impl BlockFamily {
    fn from_points(points: Vec<Coord>) -> Self {
        let mut fam = BlockFamily::default();
        let mut rest = points;
        let n = rest.len();
        // carve the binary representation of n into blocks, largest last
        let mut bit = 0;
        while (n >> bit) > 0 {
            if (n >> bit) & 1 == 1 {
                let take: Vec<Coord> = rest.drain(..1 << bit).collect();
                fam.set(bit, Some(Block::build(take)));
            } else {
                fam.set(bit, None);
            }
            bit += 1;
        }
        fam.len = n;
        fam
    }

    fn set(&mut self, i: usize, b: Option<Block>) {
        if self.blocks.len() <= i {
            self.blocks.resize_with(i + 1, || None);
        }
        self.blocks[i] = b;
    }

    fn insert(&mut self, p: Coord) {
        let mut carry = vec![p];
        let mut i = 0;
        while let Some(b) = self.blocks.get_mut(i).and_then(Option::take) {
            carry.extend(b.points);
            i += 1;
        }
        self.set(i, Some(Block::build(carry)));
        self.len += 1;
    }

    fn quadrant(&self, p: Coord) -> usize {
        self.blocks.iter().flatten().map(|b| b.quadrant(p)).sum()
    }
}

/// Closed-quadrant dominance counter over a dynamic set of distinct points.
#[derive(Debug, Clone, Default)]
pub struct DominanceCounter {
    live: BlockFamily,
    dead: BlockFamily,
    present: HashSet<Coord>,
}

impl DominanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = Coord>) -> Result<Self, CounterError> {
        let mut present = HashSet::new();
        for p in points {
            if !present.insert(p) {
                return Err(CounterError::Duplicate(p));
            }
        }
        let live = BlockFamily::from_points(present.iter().copied().collect());
        Ok(DominanceCounter {
            live,
            dead: BlockFamily::default(),
            present,
        })
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn contains(&self, p: Coord) -> bool {
        self.present.contains(&p)
    }

    pub fn insert(&mut self, p: Coord) -> Result<(), CounterError> {
        if !self.present.insert(p) {
            return Err(CounterError::Duplicate(p));
        }
        self.live.insert(p);
        Ok(())
    }

    pub fn delete(&mut self, p: Coord) -> Result<(), CounterError> {
        if !self.present.remove(&p) {
            return Err(CounterError::Absent(p));
        }
        self.dead.insert(p);
        if self.dead.len * 2 > self.live.len {
            self.live = BlockFamily::from_points(self.present.iter().copied().collect());
            self.dead = BlockFamily::default();
        }
        Ok(())
    }

    /// Number of stored points dominated by `p`; `p` itself is never counted.
    pub fn count_dominated(&self, p: Coord) -> u64 {
        let closed = self.live.quadrant(p) - self.dead.quadrant(p);
        (closed - usize::from(self.present.contains(&p))) as u64
    }
}
