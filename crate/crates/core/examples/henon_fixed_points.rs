//! Fixed points of the Henon map, their multipliers, short periodic orbits and
//! the quadratic accuracy of first-order fixed-point tracking.

use delaymap::dynsys::{
    find_fixed_points, periodic_orbit_scan, tracking_remainder_order, Ball, BuiltinSystem, FixedPointOptions,
};
use delaymap::polybasis::PolyBasis;
use delaymap::sampling::{stream_rng, unit_sphere};

fn main() -> delaymap::Result<()> {
    let henon = BuiltinSystem::henon();
    let region = Ball::centered(2, 3.0);
    let opts = FixedPointOptions::default();
    let set = find_fixed_points(&henon, &region, &opts)?;
    for (z, mult) in set.points.iter().zip(&set.multipliers) {
        let moduli: Vec<f64> = mult.iter().map(|m| m.modulus()).collect();
        println!("fixed point ({:.6}, {:.6}), |multipliers| {moduli:.4?}", z[0], z[1]);
    }
    println!("separation {:?}", set.min_separation);

    for orbit in periodic_orbit_scan(&henon, &region, &opts, 6)? {
        println!("period {}: starts at ({:.5}, {:.5})", orbit.period, orbit.points[0][0], orbit.points[0][1]);
    }

    let basis = PolyBasis::enumerate(2, 5)?;
    let dir = unit_sphere(&mut stream_rng(3, 0), basis.len());
    let order = tracking_remainder_order(&henon, &set.points[0], &basis, &dir, &[1e-2, 1e-3, 1e-4, 1e-5])?;
    println!("tracking remainder slope {:?}", order.slope());
    Ok(())
}
