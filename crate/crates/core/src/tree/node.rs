use std::cell::Cell;
use std::cmp::Ordering;

use crate::geometry::{canonical_cmp, Coord, PointId};

thread_local! {
    static VISITS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn visit() {
    VISITS.with(|v| v.set(v.get() + 1));
}

/// Nodes touched by tree operations on this thread since the last reset.
pub fn node_visits() -> u64 {
    VISITS.with(Cell::get)
}

pub fn reset_node_visits() {
    VISITS.with(|v| v.set(0));
}

/// One entry of a node's top list. `rel` is relative to the owning node: the
/// true score is `rel` plus the `add` of the owner and of every ancestor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopEntry {
    pub id: PointId,
    pub x: i64,
    pub y: i64,
    pub rel: i64,
}

impl TopEntry {
    pub fn coord(&self) -> Coord {
        Coord::new(self.x, self.y)
    }
}

#[inline]
pub(crate) fn entry_cmp(a: &TopEntry, b: &TopEntry) -> Ordering {
    canonical_cmp(a.rel, a.coord(), b.rel, b.coord())
}

/// Shape parameters shared by every node of a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Ctx {
    pub a: usize,
    pub b: usize,
    pub k: usize,
    /// Lowest height carrying `add` and `top`.
    pub h0: u32,
}

#[derive(Clone, Debug)]
pub(crate) enum Body {
    Leaf { id: PointId, base: i64 },
    Inner(Vec<Node>),
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub height: u32,
    /// Leftmost leaf (smallest x, largest y).
    pub lo: Coord,
    /// Rightmost leaf; its coordinates are the node's x and y router keys.
    pub hi: Coord,
    pub len: usize,
    pub add: i64,
    pub top: Vec<TopEntry>,
    pub body: Body,
}

impl Node {
    pub fn leaf(id: PointId, at: Coord, base: i64) -> Node {
        Node {
            height: 0,
            lo: at,
            hi: at,
            len: 1,
            add: 0,
            top: Vec::new(),
            body: Body::Leaf { id, base },
        }
    }

    /// Inner node over `children` (all of height `height - 1`), with fresh
    /// summary fields and `add = 0`.
    pub fn inner(children: Vec<Node>, ctx: &Ctx) -> Node {
        debug_assert!(!children.is_empty());
        let height = children[0].height + 1;
        let mut n = Node {
            height,
            lo: children[0].lo,
            hi: children[0].hi,
            len: 0,
            add: 0,
            top: Vec::new(),
            body: Body::Inner(children),
        };
        n.refresh(ctx);
        n
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.body, Body::Leaf { .. })
    }

    pub fn children(&self) -> &[Node] {
        match &self.body {
            Body::Inner(c) => c,
            Body::Leaf { .. } => &[],
        }
    }

    pub fn children_mut(&mut self) -> &mut Vec<Node> {
        match &mut self.body {
            Body::Inner(c) => c,
            Body::Leaf { .. } => unreachable!("leaf has no children"),
        }
    }

    pub fn take_children(&mut self) -> Vec<Node> {
        std::mem::take(self.children_mut())
    }

    pub fn arity(&self) -> usize {
        self.children().len()
    }

    /// The `i`-th best entry of this node, expressed relative to its parent.
    /// A leaf offers itself as its only entry.
    #[inline]
    pub fn lifted_entry(&self, i: usize) -> Option<TopEntry> {
        match &self.body {
            Body::Leaf { id, base } => (i == 0).then_some(TopEntry {
                id: *id,
                x: self.lo.x,
                y: self.lo.y,
                rel: *base,
            }),
            Body::Inner(_) => self.top.get(i).map(|e| TopEntry {
                rel: e.rel + self.add,
                ..*e
            }),
        }
    }

    pub fn for_each_leaf(&self, f: &mut impl FnMut(PointId, Coord, i64)) {
        match &self.body {
            Body::Leaf { id, base } => f(*id, self.lo, *base),
            Body::Inner(children) => children.iter().for_each(|c| c.for_each_leaf(f)),
        }
    }

    pub fn for_each_leaf_mut(&mut self, f: &mut impl FnMut(PointId, Coord, &mut i64)) {
        let at = self.lo;
        match &mut self.body {
            Body::Leaf { id, base } => f(*id, at, base),
            Body::Inner(children) => children.iter_mut().for_each(|c| c.for_each_leaf_mut(f)),
        }
    }

    /// Recomputes bounds, size and top list from the children.
    pub fn refresh(&mut self, ctx: &Ctx) {
        if let Body::Inner(children) = &self.body {
            self.lo = children[0].lo;
            self.hi = children[children.len() - 1].hi;
            self.len = children.iter().map(|c| c.len).sum();
        }
        self.refresh_top(ctx);
    }

    pub fn refresh_top(&mut self, ctx: &Ctx) {
        if self.is_leaf() {
            return;
        }
        visit();
        if self.height > ctx.h0 {
            let mut top = std::mem::take(&mut self.top);
            merge_lists(self.children(), ctx.k, &mut top);
            self.top = top;
        } else if self.height == ctx.h0 {
            // Threshold nodes list their whole subtree; below the threshold
            // there are no adds, so each entry's relative score is the base.
            let mut all = Vec::with_capacity(self.len);
            self.for_each_leaf(&mut |id, c, base| {
                all.push(TopEntry {
                    id,
                    x: c.x,
                    y: c.y,
                    rel: base,
                })
            });
            all.sort_unstable_by(entry_cmp);
            self.top = all;
        } else {
            self.top.clear();
        }
    }

    /// Adds `delta` to the score of every point below this node.
    pub fn apply_add(&mut self, delta: i64, ctx: &Ctx) {
        match &mut self.body {
            Body::Leaf { base, .. } => *base += delta,
            Body::Inner(_) if self.height >= ctx.h0 => self.add += delta,
            Body::Inner(_) => self.for_each_leaf_mut(&mut |_, _, base| *base += delta),
        }
    }

    /// Moves this node's `add` into its children (or, at the threshold
    /// height, into the leaves) so that the child list can be restructured.
    pub fn push_down(&mut self, ctx: &Ctx) {
        if self.add == 0 {
            return;
        }
        let add = std::mem::take(&mut self.add);
        if self.height > ctx.h0 {
            for c in self.children_mut() {
                c.apply_add(add, ctx);
            }
        } else {
            debug_assert_eq!(self.height, ctx.h0);
            self.for_each_leaf_mut(&mut |_, _, base| *base += add);
        }
        for e in &mut self.top {
            e.rel += add;
        }
    }

    /// Splits an overfull node in half, returning the right half. The node
    /// must already be pushed down and have a correct top list.
    pub fn node_split(&mut self, ctx: &Ctx) -> Node {
        visit();
        self.push_down(ctx);
        let children = self.children_mut();
        let mid = children.len() / 2;
        let right_children = children.split_off(mid);
        let mut right = Node {
            height: self.height,
            lo: right_children[0].lo,
            hi: right_children[right_children.len() - 1].hi,
            len: right_children.iter().map(|c| c.len).sum(),
            add: 0,
            top: Vec::new(),
            body: Body::Inner(right_children),
        };
        let left_hi = self.children().last().expect("non-empty").hi;
        self.hi = left_hi;
        self.len -= right.len;
        if self.height == ctx.h0 && self.height > 0 {
            // Partition the full list by which half holds each point.
            let all = std::mem::take(&mut self.top);
            let (l, r): (Vec<_>, Vec<_>) = all.into_iter().partition(|e| e.x <= left_hi.x);
            self.top = l;
            right.top = r;
        } else {
            self.refresh_top(ctx);
            right.refresh_top(ctx);
        }
        right
    }

    /// Merges `right` (the next sibling) into `self`.
    pub fn node_merge(&mut self, mut right: Node, ctx: &Ctx) {
        visit();
        debug_assert_eq!(self.height, right.height);
        self.push_down(ctx);
        right.push_down(ctx);
        let right_top = std::mem::take(&mut right.top);
        let right_children = match right.body {
            Body::Inner(c) => c,
            Body::Leaf { .. } => unreachable!("leaves are never merged"),
        };
        self.children_mut().extend(right_children);
        self.hi = right.hi;
        self.len += right.len;
        if self.height == ctx.h0 {
            let left_top = std::mem::take(&mut self.top);
            self.top = merge_sorted(left_top, right_top);
        } else {
            self.refresh_top(ctx);
        }
    }
}

/// Merges the lifted lists of `children` into the best `k` entries.
pub(crate) fn merge_lists(children: &[Node], k: usize, out: &mut Vec<TopEntry>) {
    out.clear();
    let mut heads = vec![0usize; children.len()];
    while out.len() < k {
        let mut best: Option<(usize, TopEntry)> = None;
        for (ci, c) in children.iter().enumerate() {
            if let Some(e) = c.lifted_entry(heads[ci]) {
                if best.is_none_or(|(_, b)| entry_cmp(&e, &b).is_lt()) {
                    best = Some((ci, e));
                }
            }
        }
        match best {
            Some((ci, e)) => {
                heads[ci] += 1;
                out.push(e);
            }
            None => break,
        }
    }
}

fn merge_sorted(a: Vec<TopEntry>, b: Vec<TopEntry>) -> Vec<TopEntry> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if entry_cmp(&a[i], &b[j]).is_le() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
