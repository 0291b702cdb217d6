use super::node::{entry_cmp, Body, Ctx, Node, TopEntry};
use crate::geometry::canonical_cmp;

struct Summary {
    // every leaf in order with its score relative to the parent
    leaves: Vec<TopEntry>,
}

pub(crate) fn check(root: Option<&Node>, ctx: &Ctx) -> Result<(), String> {
    let Some(root) = root else {
        return Ok(());
    };
    if !root.is_leaf() && root.arity() < 2 {
        return Err(format!("root has {} children", root.arity()));
    }
    let s = walk(root, ctx, true)?;
    for w in s.leaves.windows(2) {
        if !(w[0].x < w[1].x && w[0].y > w[1].y) {
            return Err(format!(
                "leaves ({},{}) and ({},{}) break the staircase",
                w[0].x, w[0].y, w[1].x, w[1].y
            ));
        }
    }
    Ok(())
}

fn walk(n: &Node, ctx: &Ctx, is_root: bool) -> Result<Summary, String> {
    let here = format!("node h={} keys=({},{})", n.height, n.hi.x, n.hi.y);
    match &n.body {
        Body::Leaf { id, base } => {
            if n.height != 0 || n.lo != n.hi || n.len != 1 {
                return Err(format!("{here}: malformed leaf"));
            }
            if n.add != 0 || !n.top.is_empty() {
                return Err(format!("{here}: leaf carries an add or a list"));
            }
            Ok(Summary {
                leaves: vec![TopEntry {
                    id: *id,
                    x: n.lo.x,
                    y: n.lo.y,
                    rel: *base,
                }],
            })
        }
        Body::Inner(children) => {
            if !is_root && (children.len() < ctx.a || children.len() > ctx.b) {
                return Err(format!(
                    "{here}: arity {} outside [{}, {}]",
                    children.len(),
                    ctx.a,
                    ctx.b
                ));
            }
            if is_root && children.len() > ctx.b {
                return Err(format!(
                    "{here}: root arity {} above {}",
                    children.len(),
                    ctx.b
                ));
            }
            let mut leaves = Vec::with_capacity(n.len);
            for c in children {
                if c.height + 1 != n.height {
                    return Err(format!("{here}: child at height {}", c.height));
                }
                let s = walk(c, ctx, false)?;
                leaves.extend(s.leaves);
            }
            if n.lo != children[0].lo || n.hi != children[children.len() - 1].hi {
                return Err(format!("{here}: stale bounds"));
            }
            if n.len != leaves.len() {
                return Err(format!(
                    "{here}: size {} but {} leaves",
                    n.len,
                    leaves.len()
                ));
            }
            if n.height < ctx.h0 {
                if n.add != 0 || !n.top.is_empty() {
                    return Err(format!("{here}: add or list below the threshold"));
                }
                return Ok(Summary { leaves });
            }
            let mut want = leaves.clone();
            want.sort_unstable_by(entry_cmp);
            if n.height > ctx.h0 {
                want.truncate(ctx.k);
            }
            if n.top.len() != want.len() {
                return Err(format!(
                    "{here}: list holds {} entries, expected {}",
                    n.top.len(),
                    want.len()
                ));
            }
            for (got, exp) in n.top.iter().zip(&want) {
                if got.rel != exp.rel
                    || canonical_cmp(got.rel, got.coord(), exp.rel, exp.coord()).is_ne()
                {
                    return Err(format!(
                        "{here}: list entry ({},{}):{} where ({},{}):{} belongs",
                        got.x, got.y, got.rel, exp.x, exp.y, exp.rel
                    ));
                }
                if got.id != exp.id {
                    return Err(format!(
                        "{here}: list entry id mismatch at ({},{})",
                        got.x, got.y
                    ));
                }
            }
            for e in &mut leaves {
                e.rel += n.add;
            }
            Ok(Summary { leaves })
        }
    }
}
