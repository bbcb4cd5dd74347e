//! Newton-based fixed point and periodic orbit search, and first-order
//! tracking of fixed points under a polynomial perturbation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Ball, DynamicalMap};
use crate::error::{check_dim, Error, Result};
use crate::fit::{check_ladder, remainder_order, RemainderOrder};
use crate::polybasis::PolyBasis;

const MAX_NEWTON_STEPS: usize = 60;
const DEDUP_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
}

impl Multiplier {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub n_seeds: usize,
    pub newton_tol: f64,
    /// Multipliers with `||lambda| - 1| <= margin` make a point non-hyperbolic.
    pub hyperbolicity_margin: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            n_seeds: 256,
            newton_tol: 1e-12,
            hyperbolicity_margin: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<DVector<f64>>,
    pub multipliers: Vec<Vec<Multiplier>>,
    pub hyperbolic: Vec<bool>,
    /// Smallest pairwise distance; `None` with fewer than two points.
    pub min_separation: Option<f64>,
}

impl FixedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn all_hyperbolic(&self) -> bool {
        self.hyperbolic.iter().all(|h| *h)
    }

    /// Smallest gap between first coordinates of distinct fixed points.
    pub fn min_first_coordinate_gap(&self) -> Option<f64> {
        pairwise_min(&self.points, |a, b| (a[0] - b[0]).abs())
    }

    /// Distance from `x` to the nearest fixed point.
    pub fn distance_to(&self, x: &DVector<f64>) -> f64 {
        self.points
            .iter()
            .map(|p| (x - p).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    pub points: Vec<DVector<f64>>,
}

fn pairwise_min(points: &[DVector<f64>], f: impl Fn(&DVector<f64>, &DVector<f64>) -> f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = f(&points[i], &points[j]);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

// Halton sequence in [-1, 1]^d mapped into the ball by rejection.
fn halton_seeds(region: &Ball, n: usize) -> Vec<DVector<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let d = region.center.len();
    let radical_inverse = |mut i: u64, base: u64| {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n && i < 1000 * n as u64 + 1000 {
        let u = DVector::from_fn(d, |k, _| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()]) - 1.0);
        i += 1;
        if u.norm() <= 1.0 {
            out.push(&region.center + u * region.radius);
        }
    }
    out
}

// Newton on `phi^k(z) - z` with the chain-rule Jacobian.
fn newton_periodic<M: DynamicalMap + ?Sized>(
    map: &M,
    seed: &DVector<f64>,
    period: usize,
    tol: f64,
) -> Option<DVector<f64>> {
    let d = map.dim();
    let mut z = seed.clone();
    for _ in 0..MAX_NEWTON_STEPS {
        let mut x = z.clone();
        let mut jac = DMatrix::identity(d, d);
        for _ in 0..period {
            jac = map.jacobian(&x) * jac;
            x = map.apply(&x);
        }
        let residual = &x - &z;
        if !residual.iter().all(|v| v.is_finite()) || z.norm() > 1e6 {
            return None;
        }
        if residual.norm() <= tol {
            return Some(z);
        }
        let step = (jac - DMatrix::identity(d, d)).lu().solve(&residual)?;
        z -= step;
    }
    let residual = iterate_n(map, &z, period) - &z;
    (residual.norm() <= tol).then_some(z)
}

fn iterate_n<M: DynamicalMap + ?Sized>(map: &M, x: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut y = x.clone();
    for _ in 0..n {
        y = map.apply(&y);
    }
    y
}

fn sort_dedup(mut pts: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for p in pts {
        if kept.iter().all(|q| (q - &p).norm() > DEDUP_RADIUS) {
            kept.push(p);
        }
    }
    kept
}

/// Newton from a deterministic Halton seed grid over `region`; keeps the
/// converged points that lie in the region.
pub fn find_fixed_points<M: DynamicalMap + ?Sized>(
    map: &M,
    region: &Ball,
    options: &FixedPointOptions,
) -> Result<FixedPointSet> {
    check_dim(map.dim(), region.center.len())?;
    if options.n_seeds == 0 {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    if !region.radius.is_finite() || region.radius < 0.0 {
        return Err(Error::InvalidArgument("region radius must be finite".into()));
    }
    let found: Vec<DVector<f64>> = halton_seeds(region, options.n_seeds)
        .iter()
        .filter_map(|s| newton_periodic(map, s, 1, options.newton_tol))
        .filter(|z| region.contains(z))
        .collect();
    let points = sort_dedup(found);
    let multipliers: Vec<Vec<Multiplier>> = points
        .iter()
        .map(|p| {
            map.jacobian(p)
                .complex_eigenvalues()
                .iter()
                .map(|c| Multiplier { re: c.re, im: c.im })
                .collect()
        })
        .collect();
    let hyperbolic = multipliers
        .iter()
        .map(|ms| {
            ms.iter()
                .all(|m| (m.modulus() - 1.0).abs() > options.hyperbolicity_margin)
        })
        .collect();
    let min_separation = pairwise_min(&points, |a, b| (a - b).norm());
    Ok(FixedPointSet {
        points,
        multipliers,
        hyperbolic,
        min_separation,
    })
}

/// Searches for points of minimal period `2..=max_period`. Finding nothing
/// is not a proof that none exist.
pub fn periodic_orbit_scan<M: DynamicalMap + ?Sized>(
    map: &M,
    region: &Ball,
    options: &FixedPointOptions,
    max_period: usize,
) -> Result<Vec<PeriodicOrbit>> {
    check_dim(map.dim(), region.center.len())?;
    let seeds = halton_seeds(region, options.n_seeds);
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let loose = 1e-8;
    for period in 2..=max_period {
        let found: Vec<DVector<f64>> = seeds
            .iter()
            .filter_map(|s| newton_periodic(map, s, period, options.newton_tol.max(1e-10)))
            .filter(|z| region.contains(z))
            .collect();
        for z in sort_dedup(found) {
            let minimal = (1..=period)
                .find(|&j| (iterate_n(map, &z, j) - &z).norm() <= loose)
                .unwrap_or(period);
            if minimal != period {
                continue;
            }
            let known = orbits.iter().any(|o| {
                o.period == period && o.points.iter().any(|q| (q - &z).norm() <= DEDUP_RADIUS.max(loose))
            });
            if known {
                continue;
            }
            let mut points = Vec::with_capacity(period);
            let mut x = z.clone();
            for _ in 0..period {
                points.push(x.clone());
                x = map.apply(&x);
            }
            orbits.push(PeriodicOrbit { period, points });
        }
    }
    Ok(orbits)
}

/// Newton refinement of a fixed point from a nearby guess.
pub fn refine_fixed_point<M: DynamicalMap + ?Sized>(
    map: &M,
    guess: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>> {
    check_dim(map.dim(), guess.len())?;
    newton_periodic(map, guess, 1, tol)
        .ok_or(Error::Singular("Newton iteration for the fixed point did not converge"))
}

/// First-order prediction `z0 + (I - psi(z0))^{-1} e_1 (p(z0) . c)`.
pub fn track_fixed_point<M: DynamicalMap + ?Sized>(
    map: &M,
    z0: &DVector<f64>,
    basis: &PolyBasis,
    coeffs: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(map.dim(), z0.len())?;
    check_dim(basis.len(), coeffs.len())?;
    let d = map.dim();
    let a = DMatrix::identity(d, d) - map.jacobian(z0);
    let sv = crate::structmat::singular_values(&a)?;
    let (largest, smallest) = (sv[0], sv[sv.len() - 1]);
    if smallest <= 1e-12 * largest.max(1.0) {
        return Err(Error::Singular("I - psi(z0) has an eigenvalue near zero"));
    }
    let shift = basis.eval_monomials(z0.as_slice())?.dot(coeffs);
    let mut rhs = DVector::zeros(d);
    rhs[0] = shift;
    let delta = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("I - psi(z0) is singular"))?;
    Ok(z0 + delta)
}

/// Order in `t` of the gap between the Newton-refined fixed point of the map
/// perturbed by `t * direction` and its first-order prediction.
pub fn tracking_remainder_order<M: DynamicalMap + Clone>(
    map: &M,
    z0: &DVector<f64>,
    basis: &PolyBasis,
    direction: &DVector<f64>,
    ts: &[f64],
) -> Result<RemainderOrder> {
    check_ladder(ts)?;
    check_dim(basis.len(), direction.len())?;
    let norm = direction.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidArgument("direction must be a nonzero finite vector".into()));
    }
    let unit = direction / norm;
    let mut rs = Vec::with_capacity(ts.len());
    for &t in ts {
        let c = &unit * t;
        let predicted = track_fixed_point(map, z0, basis, &c)?;
        let pert = super::PerturbedSystem::new(map.clone(), basis.clone(), c, t)?;
        let truth = refine_fixed_point(&pert, &predicted, 1e-14)?;
        rs.push((truth - predicted).norm());
    }
    remainder_order(ts, &rs, z0.norm())
}
