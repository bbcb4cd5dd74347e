//! Assembled probability bounds for the Henon map with a measured cover
//! constant, singular-value minima over covers and Lipschitz estimates.

use delaymap::experiment::{bounds, ExperimentConfig};

fn main() -> delaymap::Result<()> {
    let cfg = ExperimentConfig {
        embedding_dim: 6,
        cloud_size: 600,
        escape_orbits: 200,
        escape_draws: 10,
        bound_samples: 100,
        ..Default::default()
    };
    let report = bounds(&cfg)?;
    print!("{}", report.table.to_csv_string()?);
    for c in report.checks.iter().filter(|c| !c.passed) {
        println!("failed: {} ({})", c.name, c.detail);
    }
    Ok(())
}
