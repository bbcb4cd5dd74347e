//! A small injectivity and immersivity experiment on the Henon map, followed
//! by the c = 0 control on a diagonal linear map, which is not immersive.

use delaymap::experiment::{embed_report, embed_verify, ExperimentConfig};

fn main() -> delaymap::Result<()> {
    let cfg = ExperimentConfig {
        embedding_dim: 6,
        cloud_size: 500,
        n_points: 200,
        n_pairs: 2000,
        n_planted: 50,
        n_draws: 10,
        escape_orbits: 200,
        escape_draws: 10,
        ..Default::default()
    };
    let out = embed_verify(&cfg)?;
    let report = embed_report(&cfg, &out);
    println!("a0 = {:e}", out.setup.a0);
    for d in &out.draws {
        println!(
            "draw {:>2}: |c| = {:.2e}, min |G| = {:.3e} ({}), min sigma = {:.3e}",
            d.draw,
            d.c_norm,
            d.min_g,
            d.min_g_witness.as_ref().map_or("none", |w| w.kind.as_str()),
            d.min_sigma
        );
    }
    for c in &report.checks {
        println!("{}: {} ({})", c.name, c.passed, c.detail);
    }

    let control = ExperimentConfig {
        system: "linear_diag(0.5, 0.3333333333333333)".into(),
        uniform_k: true,
        a0: Some(1e-3),
        expect_control_immersion_failure: true,
        ..cfg
    };
    let out = embed_verify(&control)?;
    let c = out.control().expect("control draw enabled");
    println!("linear control: min sigma {:e}, immersive {}", c.min_sigma, c.immersive);
    println!("perturbed draws immersive: {}/{}", out.immersive_count(), control.n_draws);
    Ok(())
}
