//! Augmented leaf-oriented (a,b)-tree over one staircase.
//!
//! Leaves hold the points of a layer of maxima in x-ascending (and therefore
//! y-descending) order, so one tree can be searched by either coordinate:
//! every node exposes the coordinates of its rightmost leaf as its x and y
//! router keys.
//!
//! Nodes at height `>= h0 = ceil(log_b K)` carry a lazy score offset `add`
//! and a `top` list with the best `K` points of their subtree, scored
//! relative to the node. Nodes exactly at `h0` list their whole subtree.
//! The true score of a point is its stored score plus the `add` of every
//! list-carrying ancestor.

mod node;
mod ops;
mod validate;

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{dominates, Coord, PointId};
use node::{visit, Body, Ctx, Node};

pub use node::{node_visits, reset_node_visits, TopEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid tree parameters: {0}")]
    InvalidParams(String),
    #[error("points do not form a staircase at {0}")]
    NotStaircase(Coord),
    #[error("concatenation order violated: {0} does not precede {1}")]
    OrderViolation(Coord, Coord),
    #[error("point {0} is not in the tree")]
    Absent(Coord),
    #[error("trees were built with different parameters")]
    ParamsMismatch,
}

/// Search dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    X,
    Y,
}

/// Arity bounds and list size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeParams {
    a: usize,
    b: usize,
    list_size: usize,
}

impl TreeParams {
    pub fn new(a: usize, b: usize, list_size: usize) -> Result<Self, TreeError> {
        if a < 2 {
            return Err(TreeError::InvalidParams(format!(
                "a = {a} must be at least 2"
            )));
        }
        if b < 2 * a {
            return Err(TreeError::InvalidParams(format!(
                "b = {b} must be at least 2a = {}",
                2 * a
            )));
        }
        if list_size == 0 {
            return Err(TreeError::InvalidParams(
                "list size must be positive".into(),
            ));
        }
        Ok(TreeParams { a, b, list_size })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Smallest `h` with `b^h >= K`.
    pub fn threshold_height(&self) -> u32 {
        let mut h = 0;
        let mut reach = 1usize;
        while reach < self.list_size {
            reach = reach.saturating_mul(self.b);
            h += 1;
        }
        h
    }

    fn ctx(&self) -> Ctx {
        Ctx {
            a: self.a,
            b: self.b,
            k: self.list_size,
            h0: self.threshold_height(),
        }
    }
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            a: 2,
            b: 4,
            list_size: 1,
        }
    }
}

/// A point as seen through a tree, with its resolved score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreePoint {
    pub id: PointId,
    pub x: i64,
    pub y: i64,
    pub score: i64,
}

impl TreePoint {
    pub const fn new(id: PointId, x: i64, y: i64, score: i64) -> Self {
        TreePoint { id, x, y, score }
    }

    pub const fn coord(&self) -> Coord {
        Coord {
            x: self.x,
            y: self.y,
        }
    }
}

/// Root list of an [`AugTree`], best first.
#[derive(Debug)]
pub enum RootView<'a> {
    Stored { entries: &'a [TopEntry], add: i64 },
    Owned(Vec<TreePoint>),
}

impl RootView<'_> {
    pub fn len(&self) -> usize {
        match self {
            RootView::Stored { entries, .. } => entries.len(),
            RootView::Owned(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `j`-th best point with its true score. Panics when out of range.
    pub fn get(&self, j: usize) -> TreePoint {
        match self {
            RootView::Stored { entries, add } => {
                let e = entries[j];
                TreePoint::new(e.id, e.x, e.y, e.rel + add)
            }
            RootView::Owned(v) => v[j],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AugTree {
    params: TreeParams,
    ctx: Ctx,
    root: Option<Node>,
}

fn check_staircase(points: &[TreePoint]) -> Result<(), TreeError> {
    for w in points.windows(2) {
        if !(w[0].x < w[1].x && w[0].y > w[1].y) {
            return Err(TreeError::NotStaircase(w[1].coord()));
        }
    }
    Ok(())
}

fn precedes(a: Coord, b: Coord) -> bool {
    a.x < b.x && a.y > b.y
}

impl AugTree {
    pub fn new(params: TreeParams) -> Self {
        AugTree {
            params,
            ctx: params.ctx(),
            root: None,
        }
    }

    /// Bottom-up construction over an x-sorted staircase. Scores are the
    /// true scores of the points.
    pub fn from_staircase(params: TreeParams, points: &[TreePoint]) -> Result<Self, TreeError> {
        check_staircase(points)?;
        let ctx = params.ctx();
        let mut level: Vec<Node> = points
            .iter()
            .map(|p| Node::leaf(p.id, p.coord(), p.score))
            .collect();
        while level.len() > 1 {
            let groups = level.len().div_ceil(ctx.b);
            let (base, extra) = (level.len() / groups, level.len() % groups);
            let mut rest = level.into_iter();
            level = (0..groups)
                .map(|g| {
                    let take = base + usize::from(g < extra);
                    Node::inner(rest.by_ref().take(take).collect(), &ctx)
                })
                .collect();
        }
        Ok(AugTree {
            params,
            ctx,
            root: level.pop(),
        })
    }

    fn with_root(&self, root: Option<Node>) -> Self {
        AugTree {
            params: self.params,
            ctx: self.ctx,
            root,
        }
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn threshold_height(&self) -> u32 {
        self.ctx.h0
    }

    pub fn len(&self) -> usize {
        self.root.as_ref().map_or(0, |r| r.len)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Height of the root; `None` when empty.
    pub fn height(&self) -> Option<u32> {
        self.root.as_ref().map(|r| r.height)
    }

    pub fn first(&self) -> Option<TreePoint> {
        self.leaf_at(0)
    }

    pub fn last(&self) -> Option<TreePoint> {
        self.len().checked_sub(1).and_then(|i| self.leaf_at(i))
    }

    /// Number of leaves satisfying `in_prefix`, which must hold on a prefix
    /// of the leaf order.
    fn prefix_len(&self, in_prefix: impl Fn(Coord) -> bool) -> usize {
        let Some(mut node) = self.root.as_ref() else {
            return 0;
        };
        let mut acc = 0;
        loop {
            visit();
            if node.is_leaf() {
                return acc + usize::from(in_prefix(node.lo));
            }
            let children = node.children();
            let i = children.partition_point(|c| in_prefix(c.hi));
            acc += children[..i].iter().map(|c| c.len).sum::<usize>();
            match children.get(i) {
                Some(c) if in_prefix(c.lo) => node = c,
                _ => return acc,
            }
        }
    }

    /// Leaf at position `i` in x order, with its resolved score.
    pub fn leaf_at(&self, mut i: usize) -> Option<TreePoint> {
        let mut node = self.root.as_ref()?;
        if i >= node.len {
            return None;
        }
        let mut offset = 0;
        loop {
            visit();
            offset += node.add;
            match &node.body {
                Body::Leaf { id, base } => {
                    return Some(TreePoint::new(*id, node.lo.x, node.lo.y, base + offset))
                }
                Body::Inner(children) => {
                    let mut next = None;
                    for c in children {
                        if i < c.len {
                            next = Some(c);
                            break;
                        }
                        i -= c.len;
                    }
                    node = next.expect("index within subtree");
                }
            }
        }
    }

    /// X search: the leaf with greatest `x <= key` and the leaf after it.
    pub fn x_neighbors(&self, key: i64) -> (Option<TreePoint>, Option<TreePoint>) {
        let r = self.prefix_len(|c| c.x <= key);
        (
            r.checked_sub(1).and_then(|i| self.leaf_at(i)),
            self.leaf_at(r),
        )
    }

    /// Y search: the leaf with least `y >= key` and the leaf after it (the
    /// greatest `y < key`).
    pub fn y_neighbors(&self, key: i64) -> (Option<TreePoint>, Option<TreePoint>) {
        let r = self.prefix_len(|c| c.y >= key);
        (
            r.checked_sub(1).and_then(|i| self.leaf_at(i)),
            self.leaf_at(r),
        )
    }

    pub fn find(&self, at: Coord) -> Option<TreePoint> {
        let r = self.prefix_len(|c| c.x < at.x);
        self.leaf_at(r).filter(|p| p.coord() == at)
    }

    pub fn contains(&self, at: Coord) -> bool {
        self.find(at).is_some()
    }

    /// All points in x order with resolved scores.
    pub fn points(&self) -> Vec<TreePoint> {
        fn walk(node: &Node, offset: i64, out: &mut Vec<TreePoint>) {
            let offset = offset + node.add;
            match &node.body {
                Body::Leaf { id, base } => {
                    out.push(TreePoint::new(*id, node.lo.x, node.lo.y, base + offset))
                }
                Body::Inner(children) => children.iter().for_each(|c| walk(c, offset, out)),
            }
        }
        let mut out = Vec::with_capacity(self.len());
        if let Some(r) = &self.root {
            walk(r, 0, &mut out);
        }
        out
    }

    /// Inserts a point with the given true score. It must fit between its
    /// x-neighbours as a staircase.
    pub fn insert(&mut self, p: TreePoint) -> Result<(), TreeError> {
        let (pred, succ) = self.x_neighbors(p.x);
        if let Some(q) = pred {
            if !precedes(q.coord(), p.coord()) {
                return Err(TreeError::NotStaircase(p.coord()));
            }
        }
        if let Some(q) = succ {
            if !precedes(p.coord(), q.coord()) {
                return Err(TreeError::NotStaircase(p.coord()));
            }
        }
        let leaf = Node::leaf(p.id, p.coord(), p.score);
        let ctx = self.ctx;
        self.root = Some(match self.root.take() {
            None => leaf,
            Some(root) if root.is_leaf() => {
                if root.lo.x < p.x {
                    Node::inner(vec![root, leaf], &ctx)
                } else {
                    Node::inner(vec![leaf, root], &ctx)
                }
            }
            Some(mut root) => match ops::insert(&mut root, leaf, &ctx) {
                Some(sibling) => Node::inner(vec![root, sibling], &ctx),
                None => root,
            },
        });
        Ok(())
    }

    /// Removes the point at `at`, returning it with its resolved score.
    pub fn delete(&mut self, at: Coord) -> Result<TreePoint, TreeError> {
        let ctx = self.ctx;
        let root = self.root.as_mut().ok_or(TreeError::Absent(at))?;
        if root.is_leaf() {
            if root.lo != at {
                return Err(TreeError::Absent(at));
            }
            let leaf = self.root.take().expect("checked");
            return Ok(leaf_point(&leaf, 0));
        }
        let removed = ops::remove(root, at, &ctx).ok_or(TreeError::Absent(at))?;
        while self
            .root
            .as_ref()
            .is_some_and(|r| !r.is_leaf() && r.arity() == 1)
        {
            let mut old = self.root.take().expect("checked");
            old.push_down(&ctx);
            self.root = old.take_children().pop();
        }
        Ok(leaf_point(&removed, 0))
    }

    /// Concatenation; every point of `self` must precede every point of
    /// `other` in the staircase order.
    pub fn concat(self, other: AugTree) -> Result<AugTree, TreeError> {
        if self.params != other.params {
            return Err(TreeError::ParamsMismatch);
        }
        if let (Some(l), Some(r)) = (&self.root, &other.root) {
            if !precedes(l.hi, r.lo) {
                return Err(TreeError::OrderViolation(l.hi, r.lo));
            }
        }
        let ctx = self.ctx;
        let root = ops::join_opt(self.root, other.root, &ctx);
        Ok(AugTree {
            params: self.params,
            ctx,
            root,
        })
    }

    /// Splits into the points satisfying `in_prefix` and the rest;
    /// `in_prefix` must hold on a prefix of the x order.
    pub fn split_prefix(self, in_prefix: impl Fn(Coord) -> bool) -> (AugTree, AugTree) {
        let (l, r) = match self.root {
            Some(root) => ops::split(root, &in_prefix, &self.ctx),
            None => (None, None),
        };
        (
            AugTree {
                params: self.params,
                ctx: self.ctx,
                root: l,
            },
            AugTree {
                params: self.params,
                ctx: self.ctx,
                root: r,
            },
        )
    }

    /// `(points with coordinate <= val, points with coordinate > val)` in
    /// the given dimension. A Y split takes its first half from the right
    /// end of the staircase.
    pub fn split(self, val: i64, dim: Dim) -> (AugTree, AugTree) {
        match dim {
            Dim::X => self.split_prefix(|c| c.x <= val),
            Dim::Y => {
                let (gt, le) = self.split_prefix(|c| c.y > val);
                (le, gt)
            }
        }
    }

    /// Adds `delta` to the score of every point of the tree that dominates
    /// `p`. Dominators form a contiguous run; subtrees inside the run get a
    /// lazy tag, threshold nodes straddling its ends are updated point by
    /// point, and top lists along both boundary paths are re-merged.
    pub fn add_to_dominators(&mut self, p: Coord, delta: i64) {
        let ctx = self.ctx;
        if let Some(root) = self.root.as_mut() {
            mark(root, p, delta, &ctx);
        }
    }

    /// Top list of the root with true scores, canonically ordered.
    pub fn root_top(&self) -> Vec<TreePoint> {
        let view = self.root_view();
        (0..view.len()).map(|j| view.get(j)).collect()
    }

    /// Indexed access to the root list without copying it. Only trees too
    /// small to carry lists (root below the threshold height) are sorted on
    /// the spot.
    pub fn root_view(&self) -> RootView<'_> {
        let Some(root) = self.root.as_ref() else {
            return RootView::Owned(Vec::new());
        };
        if root.is_leaf() {
            return RootView::Owned(vec![leaf_point(root, 0)]);
        }
        if root.height < self.ctx.h0 {
            let mut all = self.points();
            all.sort_unstable_by(|a, b| {
                crate::geometry::canonical_cmp(a.score, a.coord(), b.score, b.coord())
            });
            all.truncate(self.ctx.k);
            return RootView::Owned(all);
        }
        let n = root.top.len().min(self.ctx.k);
        RootView::Stored {
            entries: &root.top[..n],
            add: root.add,
        }
    }

    /// Entries of the lists hanging off the root-to-`p` path: the lists of
    /// every path node and of all their children, with true scores, minus
    /// `excluded`. The best point not in `excluded` is always among them
    /// when `excluded` holds `p` and the points already taken from this
    /// tree.
    pub fn path_candidates(
        &self,
        p: Coord,
        excluded: &HashSet<PointId>,
    ) -> Result<Vec<TreePoint>, TreeError> {
        let mut node = self.root.as_ref().ok_or(TreeError::Absent(p))?;
        if !self.contains(p) {
            return Err(TreeError::Absent(p));
        }
        let mut out = Vec::new();
        let push = |e: TopEntry, score: i64, out: &mut Vec<TreePoint>| {
            if !excluded.contains(&e.id) {
                out.push(TreePoint::new(e.id, e.x, e.y, score));
            }
        };
        if node.is_leaf() || node.height < self.ctx.h0 {
            for q in self.points() {
                if !excluded.contains(&q.id) {
                    out.push(q);
                }
            }
            return Ok(out);
        }
        let mut above = 0;
        for e in &node.top {
            push(*e, e.rel + node.add + above, &mut out);
        }
        loop {
            visit();
            above += node.add;
            if node.height <= self.ctx.h0 {
                break;
            }
            let children = node.children();
            for c in children {
                let mut i = 0;
                while let Some(e) = c.lifted_entry(i) {
                    push(e, e.rel + above, &mut out);
                    i += 1;
                }
            }
            let i = children.partition_point(|c| c.hi.x < p.x);
            node = &children[i];
            if node.is_leaf() {
                break;
            }
        }
        Ok(out)
    }

    /// Total number of stored top-list entries.
    pub fn top_entry_count(&self) -> usize {
        fn walk(n: &Node) -> usize {
            n.top.len() + n.children().iter().map(walk).sum::<usize>()
        }
        self.root.as_ref().map_or(0, walk)
    }

    /// Upper bound on `top_entry_count` implied by the list sizes:
    /// `b*K` per threshold node plus `K` per node above it.
    pub fn top_entry_bound(&self) -> usize {
        fn walk(n: &Node, ctx: &Ctx) -> usize {
            let own = if n.is_leaf() || n.height < ctx.h0 {
                0
            } else if n.height == ctx.h0 {
                ctx.b * ctx.k
            } else {
                ctx.k
            };
            own + n.children().iter().map(|c| walk(c, ctx)).sum::<usize>()
        }
        self.root.as_ref().map_or(0, |r| walk(r, &self.ctx))
    }

    /// Checks every structural and augmentation invariant.
    pub fn validate(&self) -> Result<(), String> {
        validate::check(self.root.as_ref(), &self.ctx)
    }

    /// Indented listing of the tree: one node per line with its keys, `add`
    /// and top list.
    pub fn dump(&self) -> String {
        fn walk(n: &Node, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match &n.body {
                Body::Leaf { id, base } => {
                    let _ = writeln!(out, "{pad}leaf #{id} ({},{}) base={base}", n.lo.x, n.lo.y);
                }
                Body::Inner(children) => {
                    let top: Vec<String> = n
                        .top
                        .iter()
                        .map(|e| format!("#{}({},{}):{}", e.id, e.x, e.y, e.rel))
                        .collect();
                    let _ = writeln!(
                        out,
                        "{pad}node h={} keys=({},{}) add={} top=[{}]",
                        n.height,
                        n.hi.x,
                        n.hi.y,
                        n.add,
                        top.join(" ")
                    );
                    children.iter().for_each(|c| walk(c, depth + 1, out));
                }
            }
        }
        let mut out = String::new();
        match &self.root {
            Some(r) => walk(r, 0, &mut out),
            None => out.push_str("empty\n"),
        }
        out
    }

    #[doc(hidden)]
    /// Corrupts the root's lazy tag; used to exercise divergence detection.
    pub fn debug_corrupt_root_add(&mut self, delta: i64) {
        if let Some(r) = self.root.as_mut() {
            match &mut r.body {
                Body::Leaf { base, .. } => *base += delta,
                Body::Inner(_) => r.add += delta,
            }
        }
    }

    /// An empty tree sharing this tree's parameters.
    pub fn empty_like(&self) -> AugTree {
        self.with_root(None)
    }
}

fn leaf_point(n: &Node, offset: i64) -> TreePoint {
    match &n.body {
        Body::Leaf { id, base } => TreePoint::new(*id, n.lo.x, n.lo.y, base + offset),
        Body::Inner(_) => unreachable!("not a leaf"),
    }
}

enum Cover {
    None,
    All,
    Some,
}

/// How many leaves of `n` dominate `p`. Leaves lie between `lo` and `hi`
/// on the staircase; only the rightmost leaf can coincide with `p`.
fn cover(n: &Node, p: Coord) -> Cover {
    if n.lo.x > p.x || n.hi.y > p.y || (n.len == 1 && n.lo == p) {
        Cover::None
    } else if n.hi.x <= p.x && n.lo.y <= p.y && n.hi != p {
        Cover::All
    } else {
        Cover::Some
    }
}

fn mark(n: &mut Node, p: Coord, delta: i64, ctx: &Ctx) -> bool {
    visit();
    match cover(n, p) {
        Cover::None => false,
        Cover::All => {
            n.apply_add(delta, ctx);
            true
        }
        Cover::Some if n.height > ctx.h0 => {
            let mut changed = false;
            for c in n.children_mut() {
                changed |= mark(c, p, delta, ctx);
            }
            if changed {
                n.refresh_top(ctx);
            }
            changed
        }
        Cover::Some => {
            n.for_each_leaf_mut(&mut |_, at, base| {
                if dominates(at, p) {
                    *base += delta;
                }
            });
            n.refresh_top(ctx);
            true
        }
    }
}
