//! Configured, seeded experiments behind the command-line front-end. Each
//! command returns a [`CommandReport`] that [`run`] writes as `report.csv`
//! and `summary.json`.

mod bounds;
mod config;
mod embed;
mod fixed_points;
pub mod rank_suite;
mod report;
mod setup;

pub use bounds::{bounds, evaluate_case, sample_set, CaseBound, SetElement};
pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use embed::{embed_report, embed_verify, sweep, DrawResult, EmbedOutcome, PairKind, PairWitness};
pub use fixed_points::fixed_points;
pub use rank_suite::rank_suite;
pub use report::{fmt_f64, Check, CommandReport, Table};
pub use setup::{sample_attractor, A0Trial, Setup};

use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    RankSuite,
    Bounds,
    FixedPoints,
    EmbedVerify,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RankSuite => "rank-suite",
            Self::Bounds => "bounds",
            Self::FixedPoints => "fixed-points",
            Self::EmbedVerify => "embed-verify",
            Self::Sweep => "sweep",
        }
    }
}

/// Runs `command` on the current rayon pool.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<CommandReport> {
    match command {
        Command::RankSuite => rank_suite(cfg),
        Command::Bounds => bounds(cfg),
        Command::FixedPoints => fixed_points(cfg),
        Command::EmbedVerify => embed_verify(cfg).map(|out| embed_report(cfg, &out)),
        Command::Sweep => sweep(cfg, &cfg.d_list),
    }
}

/// Runs `command` on a pool of `threads` workers (0 means rayon's default)
/// and writes the report into `out_dir`.
pub fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<CommandReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let report = pool.install(|| execute(command, cfg))?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    report.write(out_dir, cfg, runtime_ms, pool.current_num_threads())?;
    Ok(report)
}
