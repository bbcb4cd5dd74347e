//! Box-counting dimension of a filled square, a segment, a single point and
//! the Henon attractor, from farthest-point covers with centers in the cloud.

use delaymap::dynsys::{Ball, BuiltinSystem};
use delaymap::experiment::sample_attractor;
use delaymap::prevalence::box_dimension;
use delaymap::sampling::stream_rng;
use nalgebra::DVector;
use rand::Rng;

fn main() -> delaymap::Result<()> {
    let scales = [0.1, 0.05, 0.025, 0.0125];
    let mut rng = stream_rng(6, 0);
    let square: Vec<DVector<f64>> = (0..40_000)
        .map(|_| DVector::from_column_slice(&[rng.random::<f64>(), rng.random::<f64>()]))
        .collect();
    let segment: Vec<DVector<f64>> = (0..4000).map(|i| DVector::from_column_slice(&[i as f64 / 3999.0, 0.0])).collect();
    let point = vec![DVector::from_column_slice(&[0.3, -0.2]); 10];
    let henon = sample_attractor(&BuiltinSystem::henon(), &DVector::zeros(2), 1000, 7, 20_000, &Ball::centered(2, 1.5))?;

    for (name, cloud) in [("square", &square), ("segment", &segment), ("point", &point), ("henon", &henon)] {
        let est = box_dimension(cloud, &scales)?;
        println!("{name:>8}: dimension {:.3}, C_K {:.3}, counts {:?}", est.dimension, est.c_k, est.counts);
    }
    Ok(())
}
