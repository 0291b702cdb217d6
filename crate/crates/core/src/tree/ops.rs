//! Structural operations on owned subtrees: leaf insertion and removal,
//! concatenation and splitting. Every node whose child list is touched is
//! pushed down first and refreshed afterwards.

use super::node::{visit, Ctx, Node};
use crate::geometry::Coord;

/// Inserts `leaf` below `node` by x order; returns a new right sibling when
/// `node` overflows.
pub(crate) fn insert(node: &mut Node, leaf: Node, ctx: &Ctx) -> Option<Node> {
    visit();
    node.push_down(ctx);
    let x = leaf.lo.x;
    let height = node.height;
    let children = node.children_mut();
    let idx = children.partition_point(|c| c.hi.x < x);
    if height == 1 {
        children.insert(idx, leaf);
    } else {
        let idx = idx.min(children.len() - 1);
        if let Some(sibling) = insert(&mut children[idx], leaf, ctx) {
            children.insert(idx + 1, sibling);
        }
    }
    node.refresh(ctx);
    (node.arity() > ctx.b).then(|| node.node_split(ctx))
}

/// Removes the leaf at `at` below `node`. Children left with fewer than `a`
/// children of their own are merged with (or rebalanced against) a sibling.
pub(crate) fn remove(node: &mut Node, at: Coord, ctx: &Ctx) -> Option<Node> {
    visit();
    let children = node.children();
    let idx = children.partition_point(|c| c.hi.x < at.x);
    if idx == children.len() {
        return None;
    }
    if node.height == 1 && children[idx].lo != at {
        return None;
    }
    node.push_down(ctx);
    let removed = if node.height == 1 {
        node.children_mut().remove(idx)
    } else {
        let removed = remove(&mut node.children_mut()[idx], at, ctx)?;
        if node.children()[idx].arity() < ctx.a {
            fix_underflow(node, idx, ctx);
        }
        removed
    };
    node.refresh(ctx);
    Some(removed)
}

/// Merges child `idx` with a neighbour; splits the result again if it is
/// too wide.
fn fix_underflow(node: &mut Node, idx: usize, ctx: &Ctx) {
    let children = node.children_mut();
    if children.len() < 2 {
        return;
    }
    let left = if idx + 1 < children.len() {
        idx
    } else {
        idx - 1
    };
    let right_node = children.remove(left + 1);
    let merged = &mut children[left];
    merged.node_merge(right_node, ctx);
    if merged.arity() > ctx.b {
        let sibling = merged.node_split(ctx);
        children.insert(left + 1, sibling);
    }
}

/// Concatenates two trees whose leaves are ordered `left` before `right`.
pub(crate) fn join(left: Node, right: Node, ctx: &Ctx) -> Node {
    visit();
    if left.height == right.height {
        if left.is_leaf() {
            return Node::inner(vec![left, right], ctx);
        }
        let mut left = left;
        left.node_merge(right, ctx);
        if left.arity() > ctx.b {
            let sibling = left.node_split(ctx);
            return Node::inner(vec![left, sibling], ctx);
        }
        return left;
    }
    if left.height > right.height {
        let mut left = left;
        match join_right_spine(&mut left, right, ctx) {
            Some(sibling) => Node::inner(vec![left, sibling], ctx),
            None => left,
        }
    } else {
        let mut right = right;
        match join_left_spine(&mut right, left, ctx) {
            Some(sibling) => Node::inner(vec![sibling, right], ctx),
            None => right,
        }
    }
}

/// Hangs `tail` (strictly lower) off the right spine of `node`.
fn join_right_spine(node: &mut Node, tail: Node, ctx: &Ctx) -> Option<Node> {
    visit();
    node.push_down(ctx);
    let attach_here = node.height == tail.height + 1;
    let children = node.children_mut();
    if attach_here {
        children.push(tail);
        let last = children.len() - 1;
        if !children[last].is_leaf() && children[last].arity() < ctx.a {
            fix_underflow(node, last, ctx);
        }
    } else {
        let last = children.len() - 1;
        if let Some(sibling) = join_right_spine(&mut children[last], tail, ctx) {
            children.push(sibling);
        }
    }
    node.refresh(ctx);
    (node.arity() > ctx.b).then(|| node.node_split(ctx))
}

/// Hangs `head` (strictly lower) off the left spine of `node`. Returns a new
/// left sibling on overflow.
fn join_left_spine(node: &mut Node, head: Node, ctx: &Ctx) -> Option<Node> {
    visit();
    node.push_down(ctx);
    let attach_here = node.height == head.height + 1;
    let children = node.children_mut();
    if attach_here {
        children.insert(0, head);
        if !children[0].is_leaf() && children[0].arity() < ctx.a {
            fix_underflow(node, 0, ctx);
        }
    } else if let Some(sibling) = join_left_spine(&mut children[0], head, ctx) {
        // `children[0]` kept the right half; the returned node goes before it.
        children.insert(0, sibling);
    }
    node.refresh(ctx);
    if node.arity() > ctx.b {
        let right = node.node_split(ctx);
        let left = std::mem::replace(node, right);
        Some(left)
    } else {
        None
    }
}

pub(crate) fn join_opt(left: Option<Node>, right: Option<Node>, ctx: &Ctx) -> Option<Node> {
    match (left, right) {
        (Some(l), Some(r)) => Some(join(l, r, ctx)),
        (l, None) => l,
        (None, r) => r,
    }
}

/// A run of siblings turned into a standalone tree.
fn forest_root(mut nodes: Vec<Node>, ctx: &Ctx) -> Option<Node> {
    match nodes.len() {
        0 => None,
        1 => nodes.pop(),
        _ => Some(Node::inner(nodes, ctx)),
    }
}

/// Splits `node` into the leaves satisfying `in_prefix` and the rest.
/// `in_prefix` must hold for a (possibly empty) prefix of the leaf order.
pub(crate) fn split(
    mut node: Node,
    in_prefix: &impl Fn(Coord) -> bool,
    ctx: &Ctx,
) -> (Option<Node>, Option<Node>) {
    visit();
    if in_prefix(node.hi) {
        return (Some(node), None);
    }
    if !in_prefix(node.lo) {
        return (None, Some(node));
    }
    // Straddles the boundary, so it is an inner node.
    node.push_down(ctx);
    let mut children = node.take_children();
    let cut = children.partition_point(|c| in_prefix(c.hi));
    let right_group = children.split_off(cut + 1);
    let straddler = children.pop().expect("boundary child");
    let left_group = children;
    let (mid_left, mid_right) = split(straddler, in_prefix, ctx);
    let left = join_opt(forest_root(left_group, ctx), mid_left, ctx);
    let right = join_opt(mid_right, forest_root(right_group, ctx), ctx);
    (left, right)
}
