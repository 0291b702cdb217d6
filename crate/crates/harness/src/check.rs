//! Lockstep differential check of the engine against the brute-force oracle.

use std::fmt;

use domtopk::engine::{Engine, EngineError};
use domtopk::geometry::{Coord, OracleSet, Point, Ranked};

use crate::oplog::{Op, OpLog};
use crate::run::{engine_for, Arity};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub arity: Arity,
    /// Compare maintained layers and their scores after every op.
    pub paranoid: bool,
}

/// First point where engine and oracle disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Divergence {
    Answer {
        line: usize,
        expected: Vec<Ranked>,
        actual: Vec<Ranked>,
    },
    LayerCount {
        line: usize,
        expected: usize,
        actual: usize,
    },
    Layer {
        line: usize,
        layer: usize,
        expected: Vec<Coord>,
        actual: Vec<Coord>,
    },
    Score {
        line: usize,
        layer: usize,
        at: Coord,
        expected: u64,
        actual: i64,
    },
    Invariant {
        line: usize,
        msg: String,
    },
    Frontier {
        line: usize,
        frontier: usize,
        k: usize,
    },
    Engine {
        line: usize,
        err: EngineError,
    },
}

fn fmt_ranked(v: &[Ranked]) -> String {
    let cells: Vec<String> = v.iter().map(Ranked::to_string).collect();
    format!("[{}]", cells.join(", "))
}

fn fmt_coords(v: &[Coord]) -> String {
    let cells: Vec<String> = v.iter().map(Coord::to_string).collect();
    format!("[{}]", cells.join(" "))
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Answer {
                line,
                expected,
                actual,
            } => write!(
                f,
                "line {line}: query answer differs\n  expected {}\n  actual   {}",
                fmt_ranked(expected),
                fmt_ranked(actual)
            ),
            Divergence::LayerCount {
                line,
                expected,
                actual,
            } => {
                write!(
                    f,
                    "line {line}: {actual} maintained layers, expected {expected}"
                )
            }
            Divergence::Layer {
                line,
                layer,
                expected,
                actual,
            } => write!(
                f,
                "line {line}: layer {layer} differs\n  expected {}\n  actual   {}",
                fmt_coords(expected),
                fmt_coords(actual)
            ),
            Divergence::Score {
                line,
                layer,
                at,
                expected,
                actual,
            } => write!(
                f,
                "line {line}: score of {at} in layer {layer} is {actual}, expected {expected}"
            ),
            Divergence::Invariant { line, msg } => {
                write!(f, "line {line}: invariant broken: {msg}")
            }
            Divergence::Frontier { line, frontier, k } => {
                write!(f, "line {line}: frontier {frontier} fell below k = {k}")
            }
            Divergence::Engine { line, err } => write!(f, "line {line}: engine error: {err}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub ops: usize,
    pub queries: usize,
    pub divergence: Option<Divergence>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

pub fn check(log: &OpLog, opts: CheckOptions) -> CheckReport {
    check_with(log, opts, |_, _| {})
}

/// Compares the maintained layers with the oracle prefix and the scores of
/// the first `k` layers with the oracle scores.
pub fn compare_layers(engine: &Engine, oracle: &OracleSet, line: usize) -> Result<(), Divergence> {
    let k = engine.config().k;
    let want = oracle.layers_prefix(engine.frontier());
    let got = engine.layers();
    if want.len() != got.len() {
        return Err(Divergence::LayerCount {
            line,
            expected: want.len(),
            actual: got.len(),
        });
    }
    for (i, (w, g)) in want.iter().zip(&got).enumerate() {
        let wc: Vec<Coord> = w.iter().map(Point::coord).collect();
        let gc: Vec<Coord> = g.iter().map(|p| p.coord()).collect();
        if wc != gc {
            return Err(Divergence::Layer {
                line,
                layer: i + 1,
                expected: wc,
                actual: gc,
            });
        }
        if i < k {
            for p in g {
                let expected = oracle.score(p.id).expect("oracle knows every engine id");
                if p.score != expected as i64 {
                    return Err(Divergence::Score {
                        line,
                        layer: i + 1,
                        at: p.coord(),
                        expected,
                        actual: p.score,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Like [`check`], calling `hook(op_index, engine)` after each op and before
/// the comparison.
pub fn check_with(
    log: &OpLog,
    opts: CheckOptions,
    mut hook: impl FnMut(usize, &mut Engine),
) -> CheckReport {
    let mut report = CheckReport {
        ops: 0,
        queries: 0,
        divergence: None,
    };
    let mut engine = match engine_for(log, opts.arity) {
        Ok(e) => e,
        Err(err) => {
            report.divergence = Some(Divergence::Engine { line: 1, err });
            return report;
        }
    };
    let k = log.header.k;
    let mut oracle = OracleSet::new();
    let mut ids = std::collections::HashMap::new();
    for (i, (op, &line)) in log.ops.iter().zip(&log.lines).enumerate() {
        let mut step = || -> Result<(), Divergence> {
            let fail = |err| Divergence::Engine { line, err };
            match *op {
                Op::Insert(c) => {
                    let p = Point::new(i as u64, c.x, c.y);
                    engine.insert(p).map_err(fail)?;
                    oracle.insert(p).expect("generated logs are duplicate-free");
                    ids.insert(c, p.id);
                }
                Op::Delete(c) => {
                    engine.delete(c).map_err(fail)?;
                    let id = ids.remove(&c).expect("engine accepted the delete");
                    oracle.remove(id).expect("oracle holds every live point");
                }
                Op::Query => {}
            }
            hook(i, &mut engine);
            if let Op::Query = op {
                report.queries += 1;
                let actual = engine.query();
                let expected = oracle.topk(k);
                if actual != expected {
                    return Err(Divergence::Answer {
                        line,
                        expected,
                        actual,
                    });
                }
            }
            if engine.frontier() < k {
                return Err(Divergence::Frontier {
                    line,
                    frontier: engine.frontier(),
                    k,
                });
            }
            if opts.paranoid {
                engine
                    .validate()
                    .map_err(|msg| Divergence::Invariant { line, msg })?;
                compare_layers(&engine, &oracle, line)?;
            }
            Ok(())
        };
        report.ops += 1;
        if let Err(d) = step() {
            report.divergence = Some(d);
            break;
        }
    }
    report
}
