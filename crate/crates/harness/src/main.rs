use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use domtopk::engine::{Dynamism, Mode};
use domtopk_harness::bench::{self, BenchConfig};
use domtopk_harness::check::{self, CheckOptions};
use domtopk_harness::gen::{self, Dist, GenConfig, Mix};
use domtopk_harness::oplog::{Header, OpLog};
use domtopk_harness::run::{self, Arity};

#[derive(Parser)]
#[command(
    name = "domtopk",
    version,
    about = "Top-k dominating query engine: workloads, replay, oracle check, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic op log.
    Gen(GenArgs),
    /// Replay an op log and print a JSON report.
    Run(RunArgs),
    /// Replay an op log against the brute-force oracle.
    Check(CheckArgs),
    /// Measure per-operation costs over a range of sizes; prints CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ArityArgs {
    /// Minimum arity of tree nodes.
    #[arg(long, default_value_t = 2)]
    a: usize,
    /// Maximum arity of tree nodes (at least 2a).
    #[arg(long, default_value_t = 4)]
    b: usize,
}

impl ArityArgs {
    fn arity(&self) -> Arity {
        Arity {
            a: self.a,
            b: self.b,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Number of operations.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value = "klist")]
    mode: Mode,
    #[arg(long, default_value = "semi")]
    dynamic: Dynamism,
    #[arg(long, default_value = "uniform")]
    dist: Dist,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// insert,delete,query ratios; defaults to 0.9,0,0.1 (semi) or 0.7,0.2,0.1 (full).
    #[arg(long)]
    mix: Option<Mix>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Op log file, or `-` for stdin.
    log: PathBuf,
    #[command(flatten)]
    arity: ArityArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Op log file, or `-` for stdin.
    log: PathBuf,
    #[command(flatten)]
    arity: ArityArgs,
    /// Also compare maintained layers and scores after every op.
    #[arg(long)]
    paranoid: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated point counts.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "4096,8192,16384,32768,65536,131072"
    )]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value = "klist")]
    mode: Mode,
    #[arg(long, default_value = "semi")]
    dynamic: Dynamism,
    #[arg(long, default_value = "uniform")]
    dist: Dist,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Queries timed per size.
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[command(flatten)]
    arity: ArityArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_log(path: &PathBuf) -> Result<OpLog> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(OpLog::parse(&text)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Gen(g) => {
            let mix = match (g.mix, g.dynamic) {
                (Some(m), _) => m,
                (None, Dynamism::Semi) => Mix::new(0.9, 0.0, 0.1)?,
                (None, Dynamism::Full) => Mix::new(0.7, 0.2, 0.1)?,
            };
            let cfg = GenConfig {
                n: g.n,
                header: Header {
                    k: g.k,
                    mode: g.mode,
                    dynamic: g.dynamic,
                },
                dist: g.dist,
                seed: g.seed,
                mix,
            };
            emit(&g.out, &gen::generate(&cfg)?.to_text())?;
        }
        Cmd::Run(r) => {
            let log = read_log(&r.log)?;
            let report = run::run(&log, r.arity.arity())?;
            emit(&r.out, &format!("{}\n", serde_json::to_string(&report)?))?;
        }
        Cmd::Check(c) => {
            let log = read_log(&c.log)?;
            let report = check::check(
                &log,
                CheckOptions {
                    arity: c.arity.arity(),
                    paranoid: c.paranoid,
                },
            );
            match report.divergence {
                None => println!("ok: {} ops, {} queries", report.ops, report.queries),
                Some(d) => {
                    println!("FAIL after {} ops\n{d}", report.ops);
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Cmd::Bench(b) => {
            let cfg = BenchConfig {
                sizes: b.sizes,
                k: b.k,
                mode: b.mode,
                dynamic: b.dynamic,
                dist: b.dist,
                seed: b.seed,
                arity: b.arity.arity(),
                queries: b.queries,
            };
            let rows = bench::bench(&cfg)?;
            emit(&b.out, &bench::to_csv(&rows)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
