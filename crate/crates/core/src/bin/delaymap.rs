use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use delaymap::experiment::{run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "delaymap", version, about = "Delay-map embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structured-matrix rank checks, randomized and exhaustive.
    RankSuite(Common),
    /// Assembled probability bounds with measured constants.
    Bounds(Common),
    /// Fixed points, multipliers, periodic scan and tracking order.
    FixedPoints(Common),
    /// Injectivity and immersivity proxies over random perturbations.
    EmbedVerify(Common),
    /// One embedding experiment per embedding dimension.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Embedding dimensions for `sweep`, e.g. `5,6,7`.
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::RankSuite(a) => (Command::RankSuite, a),
        Cmd::Bounds(a) => (Command::Bounds, a),
        Cmd::FixedPoints(a) => (Command::FixedPoints, a),
        Cmd::EmbedVerify(a) => (Command::EmbedVerify, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let mut cfg = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(list) = args.d_list {
        cfg.d_list = list;
    }
    match run(command, &cfg, &args.out, args.threads) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
