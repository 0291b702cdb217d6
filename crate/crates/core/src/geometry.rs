//! Points, the dominance relation, and brute-force ground truth.
//!
//! Smaller coordinates are preferred: `p` dominates `q` when it is no larger
//! in both coordinates and strictly smaller in at least one. Everything in
//! this module is deliberately naive (pairwise or iterated-maxima) so that it
//! can serve as an oracle for the dynamic structures elsewhere in the crate.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PointId = u64;

/// A pair of integer coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i64,
    pub y: i64,
}

impl Coord {
    pub const fn new(x: i64, y: i64) -> Self {
        Coord { x, y }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Coord {
    fn from((x, y): (i64, i64)) -> Self {
        Coord { x, y }
    }
}

/// A stored point. `base_score` is whatever score the owning structure keeps
/// for the point; it is only guaranteed to be the true dominance score where
/// the owner says so.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub id: PointId,
    pub x: i64,
    pub y: i64,
    pub base_score: u64,
}

impl Point {
    pub const fn new(id: PointId, x: i64, y: i64) -> Self {
        Point {
            id,
            x,
            y,
            base_score: 0,
        }
    }

    pub const fn coord(&self) -> Coord {
        Coord {
            x: self.x,
            y: self.y,
        }
    }

    pub fn dominates(&self, other: &Point) -> bool {
        dominates(self.coord(), other.coord())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("duplicate point {0}")]
    DuplicatePoint(Coord),
    #[error("duplicate point id {0}")]
    DuplicateId(PointId),
    #[error("unknown point id {0}")]
    UnknownId(PointId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `(x_p <= x_q && y_p < y_q) || (x_p < x_q && y_p <= y_q)`
#[inline]
pub fn dominates(p: Coord, q: Coord) -> bool {
    (p.x <= q.x && p.y < q.y) || (p.x < q.x && p.y <= q.y)
}

/// Canonical answer order: score descending, then x ascending, then y ascending.
#[inline]
pub fn canonical_cmp(score_a: i64, a: Coord, score_b: i64, b: Coord) -> Ordering {
    score_b
        .cmp(&score_a)
        .then(a.x.cmp(&b.x))
        .then(a.y.cmp(&b.y))
}

/// One entry of a top-k answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ranked {
    pub id: PointId,
    pub x: i64,
    pub y: i64,
    pub score: u64,
}

impl Ranked {
    pub const fn coord(&self) -> Coord {
        Coord {
            x: self.x,
            y: self.y,
        }
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(
            self.score as i64,
            self.coord(),
            other.score as i64,
            other.coord(),
        )
        .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ranked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({},{}),{})", self.x, self.y, self.score)
    }
}

/// Rejects exact coordinate duplicates and repeated ids.
pub fn ensure_distinct(points: &[Point]) -> Result<(), GeometryError> {
    let mut coords = HashSet::with_capacity(points.len());
    let mut ids = HashSet::with_capacity(points.len());
    for p in points {
        if !coords.insert(p.coord()) {
            return Err(GeometryError::DuplicatePoint(p.coord()));
        }
        if !ids.insert(p.id) {
            return Err(GeometryError::DuplicateId(p.id));
        }
    }
    Ok(())
}

/// Pairwise O(n^2) dominance scores.
pub fn oracle_scores(points: &[Point]) -> Result<HashMap<PointId, u64>, GeometryError> {
    ensure_distinct(points)?;
    Ok(points
        .iter()
        .map(|p| {
            let s = points.iter().filter(|q| p.dominates(q)).count() as u64;
            (p.id, s)
        })
        .collect())
}

/// Layers of maxima by iterated peeling; each layer is x-ascending.
pub fn oracle_layers(points: &[Point]) -> Result<Vec<Vec<Point>>, GeometryError> {
    oracle_layers_prefix(points, usize::MAX)
}

/// The first `limit` layers of maxima (fewer if the set runs out).
pub fn oracle_layers_prefix(
    points: &[Point],
    limit: usize,
) -> Result<Vec<Vec<Point>>, GeometryError> {
    ensure_distinct(points)?;
    // Sort once by (x, y); then a point is maximal among the remaining ones
    // iff its y is below every earlier remaining y.
    let mut rest: Vec<Point> = points.to_vec();
    rest.sort_by_key(|p| (p.x, p.y));
    let mut layers = Vec::new();
    while !rest.is_empty() && layers.len() < limit {
        let mut layer = Vec::new();
        let mut next = Vec::with_capacity(rest.len());
        let mut min_y = i64::MAX;
        for (i, p) in rest.into_iter().enumerate() {
            if i == 0 || p.y < min_y {
                min_y = p.y;
                layer.push(p);
            } else {
                next.push(p);
            }
        }
        layers.push(layer);
        rest = next;
    }
    Ok(layers)
}

/// Sorts `(point, score)` pairs canonically and keeps the first `k`.
pub fn rank_canonical(mut scored: Vec<Ranked>, k: usize) -> Vec<Ranked> {
    scored.sort_unstable();
    scored.truncate(k);
    scored
}

/// The first `min(k, n)` points in canonical order together with their scores.
pub fn oracle_topk(points: &[Point], k: usize) -> Result<Vec<Ranked>, GeometryError> {
    if k == 0 {
        ensure_distinct(points)?;
        return Ok(Vec::new());
    }
    let scores = oracle_scores(points)?;
    let scored = points
        .iter()
        .map(|p| Ranked {
            id: p.id,
            x: p.x,
            y: p.y,
            score: scores[&p.id],
        })
        .collect();
    Ok(rank_canonical(scored, k))
}

/// Incrementally maintained brute-force scores: every update does O(n)
/// pairwise dominance tests, so a long op log can be checked without an
/// O(n^2) recomputation per query.
#[derive(Debug, Default, Clone)]
pub struct OracleSet {
    points: Vec<Point>,
    scores: Vec<u64>,
    index: HashMap<PointId, usize>,
    coords: HashSet<Coord>,
}

impl OracleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn contains(&self, c: Coord) -> bool {
        self.coords.contains(&c)
    }

    pub fn score(&self, id: PointId) -> Option<u64> {
        self.index.get(&id).map(|&i| self.scores[i])
    }

    pub fn insert(&mut self, p: Point) -> Result<(), GeometryError> {
        if self.coords.contains(&p.coord()) {
            return Err(GeometryError::DuplicatePoint(p.coord()));
        }
        if self.index.contains_key(&p.id) {
            return Err(GeometryError::DuplicateId(p.id));
        }
        let mut own = 0;
        for (q, s) in self.points.iter().zip(self.scores.iter_mut()) {
            if q.dominates(&p) {
                *s += 1;
            } else if p.dominates(q) {
                own += 1;
            }
        }
        self.index.insert(p.id, self.points.len());
        self.coords.insert(p.coord());
        self.points.push(p);
        self.scores.push(own);
        Ok(())
    }

    pub fn remove(&mut self, id: PointId) -> Result<Point, GeometryError> {
        let i = self.index.remove(&id).ok_or(GeometryError::UnknownId(id))?;
        let p = self.points.swap_remove(i);
        self.scores.swap_remove(i);
        if i < self.points.len() {
            self.index.insert(self.points[i].id, i);
        }
        self.coords.remove(&p.coord());
        for (q, s) in self.points.iter().zip(self.scores.iter_mut()) {
            if q.dominates(&p) {
                *s -= 1;
            }
        }
        Ok(p)
    }

    pub fn topk(&self, k: usize) -> Vec<Ranked> {
        let scored = self
            .points
            .iter()
            .zip(&self.scores)
            .map(|(p, &score)| Ranked {
                id: p.id,
                x: p.x,
                y: p.y,
                score,
            })
            .collect();
        rank_canonical(scored, k)
    }

    pub fn layers_prefix(&self, limit: usize) -> Vec<Vec<Point>> {
        oracle_layers_prefix(&self.points, limit).expect("oracle set is duplicate-free")
    }
}

/// Parses the plain point format: one `x y` pair per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Coord>, GeometryError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<i64, GeometryError> {
            let tok = tok.ok_or_else(|| GeometryError::Parse {
                line: i + 1,
                msg: "expected two integers".into(),
            })?;
            tok.parse().map_err(|e| GeometryError::Parse {
                line: i + 1,
                msg: format!("bad integer {tok:?}: {e}"),
            })
        };
        let x = parse(it.next())?;
        let y = parse(it.next())?;
        if it.next().is_some() {
            return Err(GeometryError::Parse {
                line: i + 1,
                msg: "trailing tokens".into(),
            });
        }
        out.push(Coord { x, y });
    }
    Ok(out)
}

pub fn format_points(points: &[Coord]) -> String {
    let mut s = String::new();
    for c in points {
        s.push_str(&format!("{} {}\n", c.x, c.y));
    }
    s
}
