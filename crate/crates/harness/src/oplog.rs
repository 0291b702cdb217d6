//! Text format for workloads.
//!
//! ```text
//! k=2 mode=klist dynamic=full
//! I 10 20
//! I 5 7
//! Q
//! D 10 20
//! Q
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::{self, Write as _};

use domtopk::engine::{Dynamism, Mode};
use domtopk::geometry::Coord;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("log has no header line")]
    MissingHeader,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: deletions are not allowed in a semi-dynamic log")]
    DeleteInSemi { line: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub k: usize,
    pub mode: Mode,
    pub dynamic: Dynamism,
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} mode={} dynamic={}",
            self.k, self.mode, self.dynamic
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Insert(Coord),
    Delete(Coord),
    Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpLog {
    pub header: Header,
    pub ops: Vec<Op>,
    /// 1-based source line of each op; synthetic logs number them densely.
    pub lines: Vec<usize>,
}

fn malformed(line: usize, msg: impl Into<String>) -> LogError {
    LogError::Malformed {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: usize, text: &str) -> Result<Header, LogError> {
    let (mut k, mut mode, mut dynamic) = (None, None, None);
    for tok in text.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| malformed(line, format!("expected key=value, found `{tok}`")))?;
        match key {
            "k" => {
                let v: usize = val
                    .parse()
                    .map_err(|_| malformed(line, format!("bad k `{val}`")))?;
                if v == 0 {
                    return Err(malformed(line, "k must be positive"));
                }
                k = Some(v);
            }
            "mode" => mode = Some(val.parse::<Mode>().map_err(|e| malformed(line, e))?),
            "dynamic" => dynamic = Some(val.parse::<Dynamism>().map_err(|e| malformed(line, e))?),
            _ => return Err(malformed(line, format!("unknown header key `{key}`"))),
        }
    }
    match (k, mode, dynamic) {
        (Some(k), Some(mode), Some(dynamic)) => Ok(Header { k, mode, dynamic }),
        _ => Err(malformed(line, "header needs k=, mode= and dynamic=")),
    }
}

fn parse_coord(line: usize, mut it: std::str::SplitWhitespace<'_>) -> Result<Coord, LogError> {
    let mut num = || -> Result<i64, LogError> {
        let tok = it
            .next()
            .ok_or_else(|| malformed(line, "missing coordinate"))?;
        tok.parse()
            .map_err(|_| malformed(line, format!("bad coordinate `{tok}`")))
    };
    let (x, y) = (num()?, num()?);
    if it.next().is_some() {
        return Err(malformed(line, "trailing tokens"));
    }
    Ok(Coord::new(x, y))
}

impl OpLog {
    pub fn new(header: Header) -> Self {
        OpLog {
            header,
            ops: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, op: Op) {
        let line = self.lines.last().map_or(2, |l| l + 1);
        self.ops.push(op);
        self.lines.push(line);
    }

    pub fn parse(text: &str) -> Result<OpLog, LogError> {
        let mut log: Option<OpLog> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some(log) = log.as_mut() else {
                log = Some(OpLog::new(parse_header(line, body)?));
                continue;
            };
            let mut it = body.split_whitespace();
            let op = match it.next() {
                Some("I") => Op::Insert(parse_coord(line, it)?),
                Some("D") => {
                    if log.header.dynamic == Dynamism::Semi {
                        return Err(LogError::DeleteInSemi { line });
                    }
                    Op::Delete(parse_coord(line, it)?)
                }
                Some("Q") => {
                    if it.next().is_some() {
                        return Err(malformed(line, "trailing tokens"));
                    }
                    Op::Query
                }
                Some(other) => return Err(malformed(line, format!("unknown op `{other}`"))),
                None => unreachable!("blank lines skipped"),
            };
            log.ops.push(op);
            log.lines.push(line);
        }
        log.ok_or(LogError::MissingHeader)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.header);
        for op in &self.ops {
            let _ = match op {
                Op::Insert(c) => writeln!(out, "I {} {}", c.x, c.y),
                Op::Delete(c) => writeln!(out, "D {} {}", c.x, c.y),
                Op::Query => writeln!(out, "Q"),
            };
        }
        out
    }
}
