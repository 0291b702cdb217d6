//! Per-size cost measurements.

use std::time::Instant;

use domtopk::engine::{Dynamism, Engine, EngineConfig, EngineError, Mode};
use domtopk::geometry::{Coord, Point};
use domtopk::tree::{node_visits, reset_node_visits};
use rand::Rng;
use serde::Serialize;

use crate::gen::{Dist, PointGen};
use crate::run::Arity;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub k: usize,
    pub mode: Mode,
    pub dynamic: Dynamism,
    pub dist: Dist,
    pub seed: u64,
    pub arity: Arity,
    /// Queries timed per size.
    pub queries: usize,
}

/// One CSV row; all `mean_*` columns are per operation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub mode: String,
    pub dynamic: String,
    pub dist: String,
    pub k: usize,
    pub mean_insert_ns: f64,
    pub mean_insert_visits: f64,
    pub mean_cascade_depth: f64,
    pub mean_delete_ns: f64,
    pub mean_delete_visits: f64,
    pub mean_query_ns: f64,
    pub mean_query_work: f64,
    pub rebuilds: u64,
    pub updates: u64,
}

fn mean(total: u128, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        total as f64 / count as f64
    }
}

/// Builds up to `n` points by insertion (and, in full mode, deletes a
/// quarter of them), then times `queries` queries.
pub fn bench_one(cfg: &BenchConfig, n: usize) -> Result<BenchRow, EngineError> {
    let ecfg = EngineConfig::new(cfg.k, cfg.mode, cfg.dynamic).with_arity(cfg.arity.a, cfg.arity.b);
    let mut engine = Engine::new(ecfg)?;
    let mut src = PointGen::new(cfg.dist, cfg.seed ^ n as u64);
    let mut live: Vec<Coord> = Vec::with_capacity(n);

    let (mut ins_ns, mut ins_visits, mut depth) = (0u128, 0u128, 0u128);
    for id in 0..n {
        let c = src.fresh();
        reset_node_visits();
        let t = Instant::now();
        engine.insert(Point::new(id as u64, c.x, c.y))?;
        ins_ns += t.elapsed().as_nanos();
        ins_visits += node_visits() as u128;
        depth += engine.stats().last_cascade_depth as u128;
        live.push(c);
    }

    let (mut del_ns, mut del_visits, mut deletes) = (0u128, 0u128, 0usize);
    if cfg.dynamic == Dynamism::Full {
        for _ in 0..n / 4 {
            let i = src.rng().gen_range(0..live.len());
            let c = live.swap_remove(i);
            reset_node_visits();
            let t = Instant::now();
            engine.delete(c)?;
            del_ns += t.elapsed().as_nanos();
            del_visits += node_visits() as u128;
            deletes += 1;
        }
    }

    let (mut q_ns, mut q_work) = (0u128, 0u128);
    for _ in 0..cfg.queries {
        let t = Instant::now();
        let answer = engine.query();
        q_ns += t.elapsed().as_nanos();
        q_work += engine.stats().last_query_work as u128;
        std::hint::black_box(answer);
    }

    Ok(BenchRow {
        n,
        mode: cfg.mode.to_string(),
        dynamic: cfg.dynamic.to_string(),
        dist: cfg.dist.to_string(),
        k: cfg.k,
        mean_insert_ns: mean(ins_ns, n),
        mean_insert_visits: mean(ins_visits, n),
        mean_cascade_depth: mean(depth, n),
        mean_delete_ns: mean(del_ns, deletes),
        mean_delete_visits: mean(del_visits, deletes),
        mean_query_ns: mean(q_ns, cfg.queries),
        mean_query_work: mean(q_work, cfg.queries),
        rebuilds: engine.stats().rebuilds,
        updates: (n + deletes) as u64,
    })
}

pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, EngineError> {
    cfg.sizes.iter().map(|&n| bench_one(cfg, n)).collect()
}

pub fn to_csv(rows: &[BenchRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
