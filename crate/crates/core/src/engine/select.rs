//! Threshold selection over a family of sorted lists.
//!
//! Each list contributes representatives at positions 1, 2, 4, ... of its
//! first `min(len, L)` elements (and at that cap), each weighted by the size
//! of the block it closes. The smallest representative whose cumulative
//! weight reaches `L` is found by weighted quickselect. Every element of a
//! counted block is no larger than its representative, so at least `L`
//! elements are at most the result; blocks at most double in size, so fewer
//! than `SELECT_SLACK * L` are.

use thiserror::Error;

/// Upper bound factor `c` of the selection guarantee.
pub const SELECT_SLACK: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("rank must be positive")]
    ZeroRank,
    #[error("rank {rank} exceeds the {total} values available")]
    TooFew { rank: usize, total: usize },
    #[error("no threshold above {0} is representable")]
    Overflow(i64),
}

/// Element picked by [`select_by`]: its key, list and position.
pub(crate) type Pick<T> = (T, usize, usize);

/// Picks an element `v` of the lists (ascending, with `at(i, j)` the `j`-th
/// smallest of list `i`) whose inclusive rank under the order
/// `(key, list, position)` lies in `[l, SELECT_SLACK * l)`.
pub(crate) fn select_by<T: Ord + Copy>(
    lens: &[usize],
    at: impl Fn(usize, usize) -> T,
    l: usize,
) -> Result<Pick<T>, SelectError> {
    if l == 0 {
        return Err(SelectError::ZeroRank);
    }
    let total: usize = lens.iter().sum();
    if total < l {
        return Err(SelectError::TooFew { rank: l, total });
    }
    let mut reps: Vec<(Pick<T>, usize)> = Vec::new();
    for (i, &len) in lens.iter().enumerate() {
        let cap = len.min(l);
        let mut prev = 0;
        let mut pos = 1;
        while prev < cap {
            let end = pos.min(cap);
            reps.push(((at(i, end - 1), i, end - 1), end - prev));
            prev = end;
            pos *= 2;
        }
    }
    let mut need = l;
    let mut slice = &mut reps[..];
    loop {
        if slice.len() == 1 {
            return Ok(slice[0].0);
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| a.0.cmp(&b.0));
        let lower: usize = slice[..mid].iter().map(|r| r.1).sum();
        if lower >= need {
            slice = &mut slice[..mid];
        } else if lower + slice[mid].1 >= need {
            return Ok(slice[mid].0);
        } else {
            need -= lower + slice[mid].1;
            slice = &mut slice[mid + 1..];
        }
    }
}

/// Threshold selection over lists sorted in descending order. Returns `tau`
/// such that at least `l` values are below `tau`; when the values are
/// pairwise distinct, fewer than `SELECT_SLACK * l` are.
pub fn frederickson_select(lists: &[Vec<i64>], l: usize) -> Result<i64, SelectError> {
    debug_assert!(lists.iter().all(|v| v.windows(2).all(|w| w[0] >= w[1])));
    let lens: Vec<usize> = lists.iter().map(Vec::len).collect();
    let (v, _, _) = select_by(&lens, |i, j| lists[i][lens[i] - 1 - j], l)?;
    v.checked_add(1).ok_or(SelectError::Overflow(v))
}
