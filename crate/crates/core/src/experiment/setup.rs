use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::delay::DelayConfig;
use crate::dynsys::{
    find_fixed_points, iterate, Ball, BuiltinSystem, DynamicalMap, FixedPointOptions, FixedPointSet,
    PerturbedSystem,
};
use crate::error::{Error, Result};
use crate::polybasis::PolyBasis;
use crate::sampling::{stream_rng, uniform_ball, unit_sphere};

pub(crate) const STREAM_CLOUD: u64 = 1 << 40;
pub(crate) const STREAM_A0: u64 = (1 << 40) + 1;
pub(crate) const STREAM_BOUNDS: u64 = (1 << 40) + 2;
pub(crate) const STREAM_RANK: u64 = 1 << 41;

/// Points of the orbit of `x0` after `burn_in` steps, taking every
/// `stride`-th iterate that lies in `k`.
pub fn sample_attractor<M: DynamicalMap + ?Sized>(
    map: &M,
    x0: &DVector<f64>,
    burn_in: usize,
    stride: usize,
    n: usize,
    k: &Ball,
) -> Result<Vec<DVector<f64>>> {
    let mut x = x0.clone();
    for _ in 0..burn_in {
        x = map.apply(&x);
    }
    let max_steps = n.saturating_mul(stride).saturating_mul(100).max(1000);
    let mut out = Vec::with_capacity(n);
    for step in 0..max_steps {
        if out.len() == n {
            break;
        }
        if x.iter().any(|v| !v.is_finite()) || x.norm() > 1e12 {
            return Err(Error::NonFinite("attractor orbit"));
        }
        if step % stride == 0 && k.contains(&x) {
            out.push(x.clone());
        }
        x = map.apply(&x);
    }
    if out.len() < n {
        return Err(Error::Config(format!(
            "degenerate configuration: only {} of {n} attractor points fell in K",
            out.len()
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct A0Trial {
    pub a0: f64,
    pub escaped_draws: usize,
}

/// Everything shared by the coefficient draws of one experiment.
#[derive(Clone, Debug)]
pub struct Setup {
    pub system: BuiltinSystem,
    pub basis: PolyBasis,
    pub k: Ball,
    pub kplus: Ball,
    pub delay: DelayConfig,
    pub fixed: FixedPointSet,
    pub cloud: Vec<DVector<f64>>,
    pub a0: f64,
    pub a0_trials: Vec<A0Trial>,
}

impl Setup {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let system = cfg.builtin_system()?;
        let basis = PolyBasis::enumerate(system.dim(), cfg.basis_degree())?;
        let k = cfg.k_ball();
        let kplus = cfg.kplus_ball();
        let delay = DelayConfig::new(cfg.embedding_dim)?.with_region(kplus.clone());
        let fixed = find_fixed_points(&system, &kplus, &FixedPointOptions::default())?;
        if let Some(gap) = fixed.min_separation {
            if cfg.delta >= gap / 3.0 {
                return Err(Error::Config(format!(
                    "delta = {} must be below a third of the fixed-point separation {gap}",
                    cfg.delta
                )));
            }
        }
        let cloud = if cfg.uniform_k {
            let mut rng = stream_rng(cfg.master_seed, STREAM_CLOUD);
            (0..cfg.cloud_size).map(|_| uniform_ball(&mut rng, &k)).collect()
        } else {
            sample_attractor(&system, &k.center, cfg.burn_in, cfg.stride, cfg.cloud_size, &k)?
        };
        let mut setup = Self {
            system,
            basis,
            k,
            kplus,
            delay,
            fixed,
            cloud,
            a0: 0.0,
            a0_trials: Vec::new(),
        };
        match cfg.a0 {
            Some(a0) => setup.a0 = a0,
            None => setup.select_a0(cfg)?,
        }
        Ok(setup)
    }

    /// Largest candidate for which sampled orbits of length `D` from `K`
    /// stay in `K+` for every sampled `c` with `|c| = a0`.
    fn select_a0(&mut self, cfg: &ExperimentConfig) -> Result<()> {
        let mut candidates = cfg.a0_candidates.clone();
        candidates.sort_by(|a, b| b.total_cmp(a));
        let orbits = &self.cloud[..cfg.escape_orbits.min(self.cloud.len())];
        for a in candidates {
            let escaped: usize = (0..cfg.escape_draws)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(cfg.master_seed, STREAM_A0 + ((i as u64) << 8));
                    let c = unit_sphere(&mut rng, self.basis.len()) * a;
                    let pert = PerturbedSystem::new(self.system, self.basis.clone(), c, a)
                        .expect("coefficients sized by the basis");
                    let bad = orbits
                        .iter()
                        .any(|x| iterate(&pert, x, cfg.embedding_dim, Some(&self.kplus)).is_err());
                    usize::from(bad)
                })
                .sum();
            self.a0_trials.push(A0Trial { a0: a, escaped_draws: escaped });
            if escaped == 0 {
                self.a0 = a;
                return Ok(());
            }
        }
        Err(Error::Hypothesis(
            "no a0 candidate keeps the sampled orbits inside K+".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn henon_attractor_cloud_and_a0() {
        let cfg = ExperimentConfig {
            embedding_dim: 4,
            cloud_size: 300,
            escape_orbits: 100,
            escape_draws: 5,
            ..Default::default()
        };
        let s = Setup::prepare(&cfg).unwrap();
        assert_eq!(s.cloud.len(), 300);
        assert!(s.cloud.iter().all(|x| s.k.contains(x)));
        assert_eq!(s.fixed.len(), 2);
        assert!(s.a0 > 0.0);
        assert_eq!(s.a0_trials.last().unwrap().escaped_draws, 0);
    }

    #[test]
    fn empty_region_is_degenerate() {
        let err = sample_attractor(
            &BuiltinSystem::henon(),
            &DVector::zeros(2),
            10,
            1,
            5,
            &Ball::new(DVector::from_column_slice(&[5.0, 5.0]), 0.1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
