//! Transfer-of-volume probability bounds, covers with centers in the set,
//! box-counting dimension, Lipschitz estimates, and singular-value minima
//! over covers.

mod bounds;
mod cover;

pub use bounds::{
    assemble_bound, bound_linear, bound_nonlinear, log_factorial, margin, measure_bound_linear_log,
    AssembledBound, BoundCase, BoundInput, BoundMode, BoundValue, CoverLaw,
};
pub use cover::{box_dimension, greedy_cover, BoxDimEstimate, CoverResult, FarthestPointOrder};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structmat::{singular_values, StructuredMatrix};

/// Sampled ratios underestimate a supremum; estimates are inflated by this.
pub const LIPSCHITZ_SAFETY: f64 = 1.5;

/// `1.5 * max |f(a) - f(b)| / |a - b|` over all sampled pairs.
pub fn lipschitz_estimate(samples: &[(DVector<f64>, DVector<f64>)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut best: f64 = 0.0;
    let mut distinct = false;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let dx = (&samples[i].0 - &samples[j].0).norm();
            if dx == 0.0 {
                continue;
            }
            distinct = true;
            best = best.max((&samples[i].1 - &samples[j].1).norm() / dx);
        }
    }
    if !distinct {
        return Err(Error::InvalidArgument("all sampled inputs coincide".into()));
    }
    Ok(LIPSCHITZ_SAFETY * best)
}

/// `1.5 * max |remainder| / |c|^2` over a ladder of coefficient norms.
pub fn remainder_constant(c_norms: &[f64], remainders: &[f64]) -> Result<f64> {
    if c_norms.len() != remainders.len() || c_norms.is_empty() {
        return Err(Error::InvalidArgument("need matching, non-empty ladders".into()));
    }
    if c_norms.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidArgument("coefficient norms must be positive".into()));
    }
    Ok(LIPSCHITZ_SAFETY
        * c_norms
            .iter()
            .zip(remainders)
            .map(|(c, r)| r / (c * c))
            .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDelta {
    pub value: f64,
    /// Input index of the minimising center.
    pub argmin: usize,
}

/// Minimum over the cover's centers of the `r`-th singular value of the
/// matrix built at each center. Ties go to the earliest center.
pub fn sigma_delta_min<F>(cover: &CoverResult, builder: F, r: usize) -> Result<SigmaDelta>
where
    F: Fn(usize) -> Result<StructuredMatrix> + Sync,
{
    if cover.is_empty() {
        return Err(Error::InvalidArgument("cover has no centers".into()));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("singular value index starts at 1".into()));
    }
    let values: Vec<Result<f64>> = cover
        .centers
        .par_iter()
        .map(|&c| {
            let m = builder(c).map_err(|e| Error::Builder {
                center: c,
                source: Box::new(e),
            })?;
            let sv = singular_values(&m.entries)?;
            Ok(sv.get(r - 1).copied().unwrap_or(0.0))
        })
        .collect();
    let mut best = SigmaDelta {
        value: f64::INFINITY,
        argmin: cover.centers[0],
    };
    for (v, &c) in values.into_iter().zip(&cover.centers) {
        let v = v?;
        if v < best.value {
            best = SigmaDelta { value: v, argmin: c };
        }
    }
    Ok(best)
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
