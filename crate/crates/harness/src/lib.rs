//! Workload generation, replay, differential checking and benchmarking for
//! the `domtopk` engine.

pub mod bench;
pub mod check;
pub mod gen;
pub mod oplog;
pub mod run;
