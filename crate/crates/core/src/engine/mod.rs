//! Layer maintenance and top-k queries.
//!
//! The engine keeps the first `F` layers of maxima as [`AugTree`]s. Every
//! other point sits in the tail: it is registered and counted, but its
//! stored score is allowed to go stale because no top-k answer can come from
//! beyond the first `k` layers. In fully dynamic mode `F` starts at
//! `k + ceil(sqrt(n0))` and loses one layer per deletion; a global rebuild
//! every `ceil(sqrt(n0))` updates restores it.

mod select;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counter::{CounterError, DominanceCounter};
use crate::geometry::{canonical_cmp, dominates, Coord, GeometryError, Point, PointId, Ranked};
use crate::tree::{AugTree, RootView, TreeError, TreeParams, TreePoint};

pub use select::{frederickson_select, SelectError, SELECT_SLACK};

/// Which top lists the trees keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Lists of size `k`; queries select over the root lists of `k` layers.
    Klist,
    /// Lists of size 1; queries walk the trees with a priority queue.
    Onelist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamism {
    /// Insertions only.
    Semi,
    /// Insertions and deletions, with periodic global rebuilds.
    Full,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "klist" => Ok(Mode::Klist),
            "onelist" => Ok(Mode::Onelist),
            _ => Err(format!("unknown mode `{s}` (expected klist or onelist)")),
        }
    }
}

impl std::str::FromStr for Dynamism {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "semi" => Ok(Dynamism::Semi),
            "full" => Ok(Dynamism::Full),
            _ => Err(format!("unknown dynamism `{s}` (expected semi or full)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Klist => "klist",
            Mode::Onelist => "onelist",
        })
    }
}

impl std::fmt::Display for Dynamism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dynamism::Semi => "semi",
            Dynamism::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub k: usize,
    pub mode: Mode,
    pub dynamic: Dynamism,
    pub a: usize,
    pub b: usize,
}

impl EngineConfig {
    pub fn new(k: usize, mode: Mode, dynamic: Dynamism) -> Self {
        EngineConfig {
            k,
            mode,
            dynamic,
            a: 2,
            b: 4,
        }
    }

    pub fn with_arity(mut self, a: usize, b: usize) -> Self {
        self.a = a;
        self.b = b;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Counter(#[from] CounterError),
    #[error("point {0} is not stored")]
    Absent(Coord),
    #[error("{0} is not supported in semi-dynamic mode")]
    Unsupported(&'static str),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl From<TreeError> for EngineError {
    fn from(e: TreeError) -> Self {
        EngineError::Internal(e.to_string())
    }
}

/// Structural work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub inserts: u64,
    pub deletes: u64,
    pub queries: u64,
    pub rebuilds: u64,
    /// Layers restructured by the most recent insertion.
    pub last_cascade_depth: u64,
    pub total_cascade_depth: u64,
    pub max_cascade_depth: u64,
    /// Layers refilled by the most recent deletion.
    pub last_promotion_depth: u64,
    /// Candidate entries examined by the most recent query.
    pub last_query_work: u64,
}

#[derive(Clone, Debug)]
pub struct Engine {
    cfg: EngineConfig,
    params: TreeParams,
    layers: Vec<AugTree>,
    frontier: usize,
    registry: HashMap<PointId, Point>,
    by_coord: HashMap<Coord, PointId>,
    counter: DominanceCounter,
    n0: usize,
    updates_since_rebuild: usize,
    budget: usize,
    stats: EngineStats,
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

fn to_ranked(p: &TreePoint) -> Ranked {
    debug_assert!(p.score >= 0, "negative resolved score at {}", p.coord());
    Ranked {
        id: p.id,
        x: p.x,
        y: p.y,
        score: p.score.max(0) as u64,
    }
}

/// Sort key realising the canonical order as ascending order.
fn canonical_key(p: &TreePoint) -> (std::cmp::Reverse<i64>, i64, i64) {
    (std::cmp::Reverse(p.score), p.x, p.y)
}

/// Points removed from a layer, waiting to be placed into the next one.
struct Payload {
    tree: AugTree,
}

impl Payload {
    /// `(min x, min y)` of the payload staircase.
    fn probe(&self) -> Coord {
        let first = self.tree.first().expect("non-empty payload");
        let last = self.tree.last().expect("non-empty payload");
        Coord::new(first.x, last.y)
    }
}

/// The gap left in a layer by a deletion or a promotion.
#[derive(Clone, Copy, Debug)]
struct Hole {
    min_x: i64,
    min_y: i64,
    /// `y` of the layer point left of the gap, if any.
    prev_y: Option<i64>,
    /// `x` of the layer point right of the gap, if any.
    next_x: Option<i64>,
}

impl Hole {
    /// Whether `q` from the next layer is dominated by nothing but the
    /// removed points.
    fn uncovers(&self, q: Coord) -> bool {
        q.x >= self.min_x
            && q.y >= self.min_y
            && self.prev_y.is_none_or(|y| q.y < y)
            && self.next_x.is_none_or(|x| q.x < x)
    }
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self, EngineError> {
        Self::with_points(cfg, std::iter::empty())
    }

    /// Builds an engine over an initial point set; ids must be distinct.
    pub fn with_points(
        cfg: EngineConfig,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self, EngineError> {
        if cfg.k == 0 {
            return Err(EngineError::Config("k must be positive".into()));
        }
        let list_size = match cfg.mode {
            Mode::Klist => cfg.k,
            Mode::Onelist => 1,
        };
        let params = TreeParams::new(cfg.a, cfg.b, list_size)
            .map_err(|e| EngineError::Config(e.to_string()))?;
        let mut registry = HashMap::new();
        let mut by_coord = HashMap::new();
        for p in points {
            if by_coord.insert(p.coord(), p.id).is_some() {
                return Err(GeometryError::DuplicatePoint(p.coord()).into());
            }
            if registry.insert(p.id, p).is_some() {
                return Err(GeometryError::DuplicateId(p.id).into());
            }
        }
        let counter = DominanceCounter::from_points(by_coord.keys().copied())?;
        let mut engine = Engine {
            cfg,
            params,
            layers: Vec::new(),
            frontier: cfg.k,
            registry,
            by_coord,
            counter,
            n0: 0,
            updates_since_rebuild: 0,
            budget: 1,
            stats: EngineStats::default(),
        };
        engine.rebuild_inner();
        Ok(engine)
    }

    pub fn config(&self) -> EngineConfig {
        self.cfg
    }

    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.is_empty()
    }

    pub fn contains(&self, at: Coord) -> bool {
        self.by_coord.contains_key(&at)
    }

    /// Number of maintained layers `F`.
    pub fn frontier(&self) -> usize {
        self.frontier
    }

    /// Updates still allowed before the next global rebuild (full mode).
    pub fn budget_left(&self) -> usize {
        self.budget - self.updates_since_rebuild
    }

    /// Rebuild period fixed at the last rebuild.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, i: usize) -> Option<&AugTree> {
        self.layers.get(i)
    }

    /// Points held outside the maintained layers.
    pub fn tail_len(&self) -> usize {
        self.len() - self.layers.iter().map(AugTree::len).sum::<usize>()
    }

    /// Maintained layers, each x-ascending with resolved scores.
    pub fn layers(&self) -> Vec<Vec<TreePoint>> {
        self.layers.iter().map(AugTree::points).collect()
    }

    /// One line per maintained layer: `(x,y,score)` entries, x ascending.
    pub fn layers_dump(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            let cells: Vec<String> = layer
                .points()
                .iter()
                .map(|p| format!("({},{},{})", p.x, p.y, p.score))
                .collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    fn new_tree(&self) -> AugTree {
        AugTree::new(self.params)
    }

    fn take_layer(&mut self, i: usize) -> AugTree {
        let empty = self.new_tree();
        std::mem::replace(&mut self.layers[i], empty)
    }

    /// Whether some point of `layer` dominates `c`, judged from the
    /// x-predecessor and the y-successor of `c`.
    fn dominated_in(layer: &AugTree, c: Coord) -> bool {
        let (pred, _) = layer.x_neighbors(c.x);
        let (ge, lt) = layer.y_neighbors(c.y);
        let succ = match ge {
            Some(q) if q.y == c.y => Some(q),
            _ => lt,
        };
        pred.is_some_and(|q| dominates(q.coord(), c))
            || succ.is_some_and(|q| dominates(q.coord(), c))
    }

    /// Index of the first maintained layer with no dominator of `c`;
    /// `frontier` when `c` belongs to the tail.
    fn target_layer(&self, c: Coord) -> usize {
        (0..self.frontier)
            .find(|&i| i >= self.layers.len() || !Self::dominated_in(&self.layers[i], c))
            .unwrap_or(self.frontier)
    }

    pub fn insert(&mut self, p: Point) -> Result<(), EngineError> {
        let c = p.coord();
        if self.by_coord.contains_key(&c) {
            return Err(GeometryError::DuplicatePoint(c).into());
        }
        if self.registry.contains_key(&p.id) {
            return Err(GeometryError::DuplicateId(p.id).into());
        }
        let base = self.counter.count_dominated(c);
        self.counter.insert(c)?;
        self.registry.insert(
            p.id,
            Point {
                base_score: base,
                ..p
            },
        );
        self.by_coord.insert(c, p.id);

        let target = self.target_layer(c);
        for layer in &mut self.layers[..target.min(self.frontier)] {
            layer.add_to_dominators(c, 1);
        }
        let depth = if target < self.frontier {
            let mut single = self.new_tree();
            single.insert(TreePoint::new(p.id, p.x, p.y, base as i64))?;
            self.cascade_insert(target, Payload { tree: single })?
        } else {
            0
        };
        self.stats.inserts += 1;
        self.stats.last_cascade_depth = depth;
        self.stats.total_cascade_depth += depth;
        self.stats.max_cascade_depth = self.stats.max_cascade_depth.max(depth);
        self.count_update();
        Ok(())
    }

    /// Places `payload` into layer `i`; the segment of layer `i` dominated
    /// by it moves on to layer `i + 1`. Returns the number of layers touched.
    fn cascade_insert(&mut self, mut i: usize, mut payload: Payload) -> Result<u64, EngineError> {
        let mut depth = 0;
        loop {
            if i >= self.frontier {
                // the rest of the cascade falls into the tail
                return Ok(depth);
            }
            depth += 1;
            if i == self.layers.len() {
                self.layers.push(payload.tree);
                return Ok(depth);
            }
            let probe = payload.probe();
            let layer = self.take_layer(i);
            let (upper, right) = layer.split_prefix(|q| q.y >= probe.y);
            let (keep, discard) = upper.split_prefix(|q| q.x < probe.x);
            let merged = keep.concat(payload.tree)?.concat(right)?;
            self.layers[i] = merged;
            if discard.is_empty() {
                return Ok(depth);
            }
            payload = Payload { tree: discard };
            i += 1;
        }
    }

    /// Removes the point at `at` (full mode only) and returns it.
    pub fn delete(&mut self, at: Coord) -> Result<Point, EngineError> {
        if self.cfg.dynamic == Dynamism::Semi {
            return Err(EngineError::Unsupported("deletion"));
        }
        let id = *self.by_coord.get(&at).ok_or(EngineError::Absent(at))?;
        self.counter.delete(at)?;
        self.by_coord.remove(&at);
        let mut removed = self.registry.remove(&id).expect("registered");

        for layer in &mut self.layers {
            layer.add_to_dominators(at, -1);
        }
        let j = self.target_layer(at);
        let mut depth = 0;
        if j < self.layers.len() && self.layers[j].contains(at) {
            let gone = self.delete_from_layer(j, at)?;
            removed.base_score = gone.0.score.max(0) as u64;
            depth = gone.1;
        }
        while self.layers.last().is_some_and(AugTree::is_empty) {
            self.layers.pop();
        }
        self.frontier = self.frontier.saturating_sub(1);
        self.layers.truncate(self.frontier);
        self.stats.deletes += 1;
        self.stats.last_promotion_depth = depth;
        self.count_update();
        Ok(removed)
    }

    /// Deletes `at` from layer `j` and refills the gap from the layers below.
    fn delete_from_layer(&mut self, j: usize, at: Coord) -> Result<(TreePoint, u64), EngineError> {
        let layer = self.take_layer(j);
        let (mut left, rest) = layer.split_prefix(|q| q.x < at.x);
        let (mid, mut right) = rest.split_prefix(|q| q.x <= at.x);
        let gone = mid.first().ok_or(EngineError::Absent(at))?;
        let mut hole = Hole {
            min_x: at.x,
            min_y: at.y,
            prev_y: left.last().map(|q| q.y),
            next_x: right.first().map(|q| q.x),
        };
        let mut cur = j;
        let mut depth = 0;
        loop {
            let src = cur + 1;
            if src >= self.frontier || src >= self.layers.len() {
                break;
            }
            let source = self.take_layer(src);
            let h = hole;
            let (before, rest) =
                source.split_prefix(|q| q.x < h.min_x || h.prev_y.is_some_and(|y| q.y >= y));
            let (window, after) = rest.split_prefix(|q| h.uncovers(q));
            if window.is_empty() {
                self.layers[src] = before.concat(after)?;
                break;
            }
            depth += 1;
            let first = window.first().expect("non-empty");
            let last = window.last().expect("non-empty");
            self.layers[cur] = left.concat(window)?.concat(right)?;
            hole = Hole {
                min_x: first.x,
                min_y: last.y,
                prev_y: before.last().map(|q| q.y),
                next_x: after.first().map(|q| q.x),
            };
            left = before;
            right = after;
            cur = src;
        }
        self.layers[cur] = left.concat(right)?;
        Ok((gone, depth))
    }

    fn count_update(&mut self) {
        self.updates_since_rebuild += 1;
        if self.cfg.dynamic == Dynamism::Full && self.updates_since_rebuild >= self.budget {
            self.rebuild();
        }
    }

    /// Recomputes every score and the first `F` layers from scratch.
    pub fn rebuild(&mut self) {
        self.rebuild_inner();
        self.stats.rebuilds += 1;
    }

    fn rebuild_inner(&mut self) {
        let n = self.registry.len();
        self.n0 = n;
        self.updates_since_rebuild = 0;
        let sqrt = ceil_sqrt(n).max(1);
        match self.cfg.dynamic {
            Dynamism::Semi => {
                self.frontier = self.cfg.k;
                self.budget = sqrt;
            }
            Dynamism::Full => {
                self.frontier = self.cfg.k + sqrt;
                self.budget = sqrt;
            }
        }
        for p in self.registry.values_mut() {
            p.base_score = self.counter.count_dominated(p.coord());
        }
        let mut pts: Vec<&Point> = self.registry.values().collect();
        pts.sort_unstable_by_key(|p| (p.x, p.y));
        // Sweep peeling: a point joins the first layer whose lowest point so
        // far lies strictly above it.
        let mut lowest: Vec<i64> = Vec::new();
        let mut peeled: Vec<Vec<TreePoint>> = Vec::new();
        for p in pts {
            let i = lowest.partition_point(|&y| y <= p.y);
            if i == lowest.len() {
                lowest.push(p.y);
                peeled.push(Vec::new());
            } else {
                lowest[i] = p.y;
            }
            if i < self.frontier {
                peeled[i].push(TreePoint::new(p.id, p.x, p.y, p.base_score as i64));
            }
        }
        peeled.truncate(self.frontier);
        self.layers = peeled
            .iter()
            .map(|l| AugTree::from_staircase(self.params, l).expect("peeled layers are staircases"))
            .collect();
    }

    /// The first `min(k, n)` points in canonical order with their scores.
    pub fn query(&mut self) -> Vec<Ranked> {
        self.stats.queries += 1;
        let (answer, work) = match self.cfg.mode {
            Mode::Klist => self.query_klist(),
            Mode::Onelist => self.query_onelist(),
        };
        self.stats.last_query_work = work;
        answer
    }

    fn query_klist(&self) -> (Vec<Ranked>, u64) {
        let k = self.cfg.k;
        let views: Vec<RootView<'_>> = self.layers.iter().take(k).map(AugTree::root_view).collect();
        let lens: Vec<usize> = views.iter().map(RootView::len).collect();
        let total: usize = lens.iter().sum();
        let reads = std::cell::Cell::new(0u64);
        let key = |i: usize, j: usize| {
            reads.set(reads.get() + 1);
            canonical_key(&views[i].get(j))
        };
        let mut chosen: Vec<TreePoint> = if total <= k {
            views
                .iter()
                .flat_map(|v| (0..v.len()).map(|j| v.get(j)))
                .collect()
        } else {
            let (tau, _, _) = select::select_by(&lens, key, k).expect("enough candidates");
            // Each list contributes its prefix of keys <= tau.
            let mut cands = Vec::new();
            for v in &views {
                for j in 0..v.len() {
                    let p = v.get(j);
                    reads.set(reads.get() + 1);
                    if canonical_key(&p) > tau {
                        break;
                    }
                    cands.push(p);
                }
            }
            cands.select_nth_unstable_by(k - 1, |a, b| canonical_key(a).cmp(&canonical_key(b)));
            cands.truncate(k);
            cands
        };
        chosen.sort_unstable_by_key(canonical_key);
        let work = reads.get() + chosen.len() as u64;
        (chosen.iter().map(to_ranked).collect(), work)
    }

    fn query_onelist(&self) -> (Vec<Ranked>, u64) {
        let k = self.cfg.k;
        let mut heap = BinaryHeap::new();
        let mut marked: HashSet<PointId> = HashSet::new();
        for (li, layer) in self.layers.iter().take(k).enumerate() {
            if let Some(best) = layer.root_top().first() {
                marked.insert(best.id);
                heap.push(HeapEntry {
                    point: *best,
                    layer: li,
                });
            }
        }
        let mut work = heap.len() as u64;
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let Some(HeapEntry { point, layer }) = heap.pop() else {
                break;
            };
            out.push(to_ranked(&point));
            if out.len() == k {
                break;
            }
            let cands = self.layers[layer]
                .path_candidates(point.coord(), &marked)
                .expect("reported point is in its layer");
            work += cands.len() as u64;
            for q in cands {
                if marked.insert(q.id) {
                    heap.push(HeapEntry { point: q, layer });
                }
            }
        }
        (out, work)
    }

    #[doc(hidden)]
    /// Shifts the lazy tag at the root of layer `i`, breaking its scores.
    pub fn debug_corrupt_layer(&mut self, i: usize, delta: i64) {
        if let Some(layer) = self.layers.get_mut(i) {
            layer.debug_corrupt_root_add(delta);
        }
    }

    /// Checks tree invariants of every maintained layer and the
    /// bookkeeping shared between them.
    pub fn validate(&self) -> Result<(), String> {
        if self.layers.len() > self.frontier {
            return Err(format!(
                "{} layers beyond frontier {}",
                self.layers.len(),
                self.frontier
            ));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| format!("layer {}: {e}", i + 1))?;
            if layer.is_empty() {
                return Err(format!("layer {} is empty", i + 1));
            }
        }
        if self.counter.len() != self.registry.len() {
            return Err("counter and registry sizes differ".into());
        }
        Ok(())
    }
}

/// Max-heap entry in canonical order.
struct HeapEntry {
    point: TreePoint,
    layer: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(
            other.point.score,
            other.point.coord(),
            self.point.score,
            self.point.coord(),
        )
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests;
