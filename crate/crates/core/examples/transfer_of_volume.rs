//! Linear and nonlinear transfer-of-volume bounds, and the epsilon exponent
//! margin of each assembled bound as the embedding dimension grows.

use delaymap::prevalence::{
    assemble_bound, bound_linear, bound_nonlinear, BoundCase, BoundInput, CoverLaw,
};

fn main() -> delaymap::Result<()> {
    let input = BoundInput { d_alpha: 210, r: 10, sigma: 0.5, lipschitz: 2.0, epsilon: 1e-6, a: 1e-2 };
    println!("linear: {:?}", bound_linear(&input)?);
    println!("nonlinear: {:?}", bound_nonlinear(&input)?);

    let d = 2;
    print!("{:>20}", "D");
    for dd in 5..=10 {
        print!("{dd:>7}");
    }
    println!();
    for case in BoundCase::ALL {
        print!("{:>20}", case.name());
        for dd in 5..=10 {
            print!("{:>7.1}", case.margin(d, dd));
        }
        println!("   threshold D = {}", case.threshold_dim(d));
    }

    let law = CoverLaw { c_k: 4.0, exponent: 4.0 };
    let b = assemble_bound(law, &BoundInput { r: 9, ..input }, BoundCase::SeparatedPairs.mode())?;
    println!(
        "separated pairs at D = 10: log bound {:.1} + {} ln eps, below one for ln eps < {:.1}",
        b.log_constant,
        b.margin,
        -b.log_constant / b.margin
    );
    Ok(())
}
