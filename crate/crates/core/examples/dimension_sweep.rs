//! Embedding experiments across delay dimensions next to the exponent margins
//! of the assembled bounds.

use delaymap::experiment::{sweep, ExperimentConfig};

fn main() -> delaymap::Result<()> {
    let cfg = ExperimentConfig {
        cloud_size: 400,
        n_points: 200,
        n_pairs: 1000,
        n_planted: 40,
        n_draws: 5,
        escape_orbits: 200,
        escape_draws: 5,
        ..Default::default()
    };
    let report = sweep(&cfg, &[5, 6, 7, 8])?;
    print!("{}", report.table.to_csv_string()?);
    Ok(())
}
