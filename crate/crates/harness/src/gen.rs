//! Synthetic workloads.

use std::collections::HashSet;

use domtopk::engine::Dynamism;
use domtopk::geometry::Coord;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use thiserror::Error;

use crate::oplog::{Header, Op, OpLog};

/// Coordinates are drawn from `[0, DOMAIN)`.
pub const DOMAIN: i64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid mix: {0}")]
    Mix(String),
    #[error("unknown distribution `{0}`")]
    Dist(String),
    #[error("a semi-dynamic workload cannot contain deletions")]
    DeletesInSemi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dist {
    Uniform,
    Correlated,
    Anticorrelated,
    Clustered,
}

impl Dist {
    pub const ALL: [Dist; 4] = [
        Dist::Uniform,
        Dist::Correlated,
        Dist::Anticorrelated,
        Dist::Clustered,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Dist::Uniform => "uniform",
            Dist::Correlated => "correlated",
            Dist::Anticorrelated => "anticorrelated",
            Dist::Clustered => "clustered",
        }
    }
}

impl std::str::FromStr for Dist {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        Dist::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| GenError::Dist(s.to_string()))
    }
}

impl std::fmt::Display for Dist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Insert / delete / query proportions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mix {
    pub insert: f64,
    pub delete: f64,
    pub query: f64,
}

impl Mix {
    pub fn new(insert: f64, delete: f64, query: f64) -> Result<Self, GenError> {
        let parts = [insert, delete, query];
        if parts.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(GenError::Mix("ratios must be non-negative".into()));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(GenError::Mix(format!("ratios sum to {sum}, not 1")));
        }
        if insert == 0.0 && delete > 0.0 {
            return Err(GenError::Mix("deletions need insertions".into()));
        }
        Ok(Mix {
            insert,
            delete,
            query,
        })
    }
}

impl std::str::FromStr for Mix {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| GenError::Mix(format!("cannot parse `{s}`")))?;
        match parts[..] {
            [i, d, q] => Mix::new(i, d, q),
            _ => Err(GenError::Mix(format!("expected three ratios in `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenConfig {
    /// Number of operations.
    pub n: usize,
    pub header: Header,
    pub dist: Dist,
    pub seed: u64,
    pub mix: Mix,
}

/// Point source for one distribution.
pub struct PointGen {
    dist: Dist,
    rng: ChaCha8Rng,
    centers: Vec<(f64, f64)>,
    used: HashSet<Coord>,
}

const CLUSTERS: usize = 5;

impl PointGen {
    pub fn new(dist: Dist, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..CLUSTERS)
            .map(|_| {
                (
                    rng.gen_range(0.1..0.9) * DOMAIN as f64,
                    rng.gen_range(0.1..0.9) * DOMAIN as f64,
                )
            })
            .collect();
        PointGen {
            dist,
            rng,
            centers,
            used: HashSet::new(),
        }
    }

    fn clamp(v: f64) -> i64 {
        (v.round() as i64).clamp(0, DOMAIN - 1)
    }

    fn draw(&mut self) -> Coord {
        let r = DOMAIN as f64;
        match self.dist {
            Dist::Uniform => {
                Coord::new(self.rng.gen_range(0..DOMAIN), self.rng.gen_range(0..DOMAIN))
            }
            Dist::Correlated => {
                let x = self.rng.gen_range(0..DOMAIN);
                let noise = Normal::new(0.0, 0.05 * r).unwrap().sample(&mut self.rng);
                Coord::new(x, Self::clamp(x as f64 + noise))
            }
            Dist::Anticorrelated => {
                let x = self.rng.gen_range(0..DOMAIN);
                let noise = Normal::new(0.0, 0.05 * r).unwrap().sample(&mut self.rng);
                Coord::new(x, Self::clamp((DOMAIN - 1 - x) as f64 + noise))
            }
            Dist::Clustered => {
                let (cx, cy) = self.centers[self.rng.gen_range(0..CLUSTERS)];
                let blob = Normal::new(0.0, 0.02 * r).unwrap();
                Coord::new(
                    Self::clamp(cx + blob.sample(&mut self.rng)),
                    Self::clamp(cy + blob.sample(&mut self.rng)),
                )
            }
        }
    }

    /// A point never returned before.
    pub fn fresh(&mut self) -> Coord {
        loop {
            let c = self.draw();
            if self.used.insert(c) {
                return c;
            }
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Deterministic op log for `cfg`. A delete drawn while nothing is live
/// becomes an insert.
pub fn generate(cfg: &GenConfig) -> Result<OpLog, GenError> {
    if cfg.header.dynamic == Dynamism::Semi && cfg.mix.delete > 0.0 {
        return Err(GenError::DeletesInSemi);
    }
    let mut src = PointGen::new(cfg.dist, cfg.seed);
    let mut live: Vec<Coord> = Vec::new();
    let mut log = OpLog::new(cfg.header);
    for _ in 0..cfg.n {
        let u: f64 = src.rng().gen();
        let op = if u < cfg.mix.insert || (u < cfg.mix.insert + cfg.mix.delete && live.is_empty()) {
            let c = src.fresh();
            live.push(c);
            Op::Insert(c)
        } else if u < cfg.mix.insert + cfg.mix.delete {
            let i = src.rng().gen_range(0..live.len());
            Op::Delete(live.swap_remove(i))
        } else {
            Op::Query
        };
        log.push(op);
    }
    Ok(log)
}
