//! Replaying an op log through the engine.

use std::time::Instant;

use domtopk::engine::{Engine, EngineConfig, EngineError};
use domtopk::geometry::{Point, Ranked};
use domtopk::tree::{node_visits, reset_node_visits};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oplog::{Op, OpLog};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("line {line}: {source}")]
    Op {
        line: usize,
        #[source]
        source: EngineError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Tree arity used when replaying a log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arity {
    pub a: usize,
    pub b: usize,
}

impl Default for Arity {
    fn default() -> Self {
        Arity { a: 2, b: 4 }
    }
}

pub fn engine_for(log: &OpLog, arity: Arity) -> Result<Engine, EngineError> {
    let h = log.header;
    Engine::new(EngineConfig::new(h.k, h.mode, h.dynamic).with_arity(arity.a, arity.b))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub node_visits: u64,
    pub rebuilds: u64,
    pub max_cascade_depth: u64,
    pub total_cascade_depth: u64,
    pub inserts: u64,
    pub deletes: u64,
    pub queries: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    /// One answer per `Q`, in order.
    pub answers: Vec<Vec<Ranked>>,
    /// Wall time of every op in nanoseconds, in order.
    pub timings_ns: Vec<u64>,
    pub counters: Counters,
}

/// Replays `log`; point ids are the 0-based op indices of their inserts.
pub fn run(log: &OpLog, arity: Arity) -> Result<RunReport, RunError> {
    let mut engine = engine_for(log, arity)?;
    let mut report = RunReport::default();
    reset_node_visits();
    for (i, (op, &line)) in log.ops.iter().zip(&log.lines).enumerate() {
        let start = Instant::now();
        let res = match *op {
            Op::Insert(c) => engine.insert(Point::new(i as u64, c.x, c.y)),
            Op::Delete(c) => engine.delete(c).map(|_| ()),
            Op::Query => {
                report.answers.push(engine.query());
                Ok(())
            }
        };
        report.timings_ns.push(start.elapsed().as_nanos() as u64);
        res.map_err(|source| RunError::Op { line, source })?;
    }
    let stats = engine.stats();
    report.counters = Counters {
        node_visits: node_visits(),
        rebuilds: stats.rebuilds,
        max_cascade_depth: stats.max_cascade_depth,
        total_cascade_depth: stats.total_cascade_depth,
        inserts: stats.inserts,
        deletes: stats.deletes,
        queries: stats.queries,
    };
    Ok(report)
}
