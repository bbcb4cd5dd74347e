//! Delay maps of a perturbed Henon map, the coefficient Jacobians `V` and `H`
//! from the forward sensitivity recursion, and their Taylor remainders.

use delaymap::delay::{
    delay_jacobian, delay_map, sensitivity_h, sensitivity_v, taylor_remainder_order, tangent_remainder_order,
    DelayConfig,
};
use delaymap::dynsys::BuiltinSystem;
use delaymap::sampling::{stream_rng, unit_sphere};
use nalgebra::DVector;

fn main() -> delaymap::Result<()> {
    let henon = BuiltinSystem::henon();
    let delay = DelayConfig::new(5)?;
    let basis = delay.default_basis(2)?;
    let x1 = DVector::from_column_slice(&[0.3, 0.2]);
    let v1 = DVector::from_column_slice(&[0.6, 0.8]);

    println!("F(x1) = {}", delay_map(&henon, &x1, &delay)?.transpose());
    println!("dF(x1) = {}", delay_jacobian(&henon, &x1, &delay)?);

    let v = sensitivity_v(&henon, &basis, &x1, &delay)?;
    let h = sensitivity_h(&henon, &basis, &x1, &v1, &delay)?;
    println!("V: {}x{}, rank {}", v.rows(), v.cols(), v.rank(1e-8)?.numerical_rank);
    println!("H: {}x{}, rank {}", h.rows(), h.cols(), h.rank(1e-8)?.numerical_rank);

    let dir = unit_sphere(&mut stream_rng(7, 0), basis.len());
    let ts = [1e-2, 1e-3, 1e-4, 1e-5];
    println!("F remainder slope {:?}", taylor_remainder_order(&henon, &basis, &x1, &delay, &dir, &ts)?.slope());
    println!(
        "dF remainder slope {:?}",
        tangent_remainder_order(&henon, &basis, &x1, &v1, &delay, &dir, &ts)?.slope()
    );
    Ok(())
}
