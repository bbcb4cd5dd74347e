//! Classification of point pairs by periodicity and orbit overlap, with the
//! rank of the compressed difference matrix in each case.

use delaymap::delay::{classify_pair, DelayConfig};
use delaymap::dynsys::{find_fixed_points, iterate, periodic_orbit_scan, Ball, BuiltinSystem, FixedPointOptions};
use nalgebra::DVector;

fn main() -> delaymap::Result<()> {
    let henon = BuiltinSystem::henon();
    let delay = DelayConfig::new(4)?;
    let basis = delay.default_basis(2)?;
    let region = Ball::centered(2, 3.0);
    let opts = FixedPointOptions::default();
    let fixed = find_fixed_points(&henon, &region, &opts)?;
    let two_cycle = periodic_orbit_scan(&henon, &region, &opts, 2)?.remove(0);

    let x = DVector::from_column_slice(&[0.3, 0.2]);
    let y = DVector::from_column_slice(&[-0.5, 0.1]);
    let x3 = iterate(&henon, &x, 3, None)?.remove(2);
    let pairs = [
        ("two fixed points", fixed.points[0].clone(), fixed.points[1].clone()),
        ("same two-cycle", two_cycle.points[0].clone(), two_cycle.points[1].clone()),
        ("generic", x.clone(), y.clone()),
        ("y on the orbit of x", x.clone(), x3),
        ("fixed point and generic", x, fixed.points[0].clone()),
    ];
    for (name, a, b) in pairs {
        let r = classify_pair(&henon, &basis, &a, &b, &delay)?;
        println!(
            "{name:>24}: {}, J_c {}x{}, rank {}",
            r.tag,
            r.compressed_j.rows(),
            r.compressed_j.cols(),
            r.product_rank.numerical_rank
        );
    }
    Ok(())
}
