//! Reproducible sampling helpers. Every stream is a ChaCha8 generator
//! keyed by a master seed and a stream index, so results do not depend on
//! how work is split across threads.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynsys::Ball;

pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

/// Uniform in the closed ball.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, ball: &Ball) -> DVector<f64> {
    let d = ball.center.len();
    let u: f64 = rng.random();
    &ball.center + unit_sphere(rng, d) * (ball.radius * u.powf(1.0 / d as f64))
}

/// Uniform in `[-1, 1]^d` with rejection until every pair is at least
/// `min_sep` apart.
pub fn separated_cube_points<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize, min_sep: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(n);
    while out.len() < n {
        let p = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        if out.iter().all(|q| (q - &p).norm() >= min_sep) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = stream_rng(7, 3).random();
        let _: f64 = stream_rng(7, 2).random();
        let b: f64 = stream_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, stream_rng(7, 4).random::<f64>());
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = stream_rng(1, 0);
        let ball = Ball::new(DVector::from_column_slice(&[1.0, -1.0, 0.5]), 0.3);
        for _ in 0..1000 {
            assert!(ball.contains(&uniform_ball(&mut rng, &ball)));
        }
        let pts = separated_cube_points(&mut rng, 2, 5, 0.1);
        for i in 0..5 {
            for j in i + 1..5 {
                assert!((&pts[i] - &pts[j]).norm() >= 0.1);
            }
        }
    }
}
