//! Monomial bases in graded order and the size of the perturbation space.

use delaymap::polybasis::{binomial, PolyBasis};

fn main() -> delaymap::Result<()> {
    let basis = PolyBasis::enumerate(2, 3)?;
    for alpha in basis.indices() {
        print!("{:?} ", alpha.exponents());
    }
    println!();
    println!("values at (2, 3): {}", basis.eval_monomials(&[2.0, 3.0])?.transpose());

    for dd in [5u64, 8, 10] {
        let degree = 2 * dd - 1;
        println!("d = 2, D = {dd}: {} coefficients", binomial(2 + degree, degree));
    }
    Ok(())
}
