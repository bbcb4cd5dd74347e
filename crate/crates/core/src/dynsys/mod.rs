//! Diffeomorphisms of `R^d`, their polynomial perturbations, orbits and
//! fixed points.

mod fixed;
mod perturbed;
mod systems;

pub use fixed::{
    find_fixed_points, periodic_orbit_scan, refine_fixed_point, track_fixed_point,
    tracking_remainder_order,
    FixedPointOptions, FixedPointSet, Multiplier, PeriodicOrbit,
};
pub use perturbed::PerturbedSystem;
pub use systems::BuiltinSystem;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Second derivative of a map: `components[i][(j, k)] = d^2 phi_i / dx_j dx_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondDerivative {
    pub components: Vec<DMatrix<f64>>,
}

impl SecondDerivative {
    pub fn zeros(dim: usize) -> Self {
        Self {
            components: vec![DMatrix::zeros(dim, dim); dim],
        }
    }

    /// `(D psi [s]) v`, i.e. component `i` is `s^T H_i v`.
    pub fn contract(&self, s: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.components.len(),
            self.components.iter().map(|h| s.dot(&(h * v))),
        )
    }
}

/// A smooth invertible map `x -> phi(x)` with its first two derivatives.
pub trait DynamicalMap: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `psi(x) = d phi / dx`.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Central differences of the Jacobian; analytic overrides are preferred.
    fn second_derivative(&self, x: &DVector<f64>) -> SecondDerivative {
        fd_second_derivative(self, x)
    }
}

pub(crate) fn fd_second_derivative<M: DynamicalMap + ?Sized>(
    map: &M,
    x: &DVector<f64>,
) -> SecondDerivative {
    let d = map.dim();
    let h = 1e-5 * (1.0 + x.norm());
    let mut out = SecondDerivative::zeros(d);
    for k in 0..d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        let dj = (map.jacobian(&xp) - map.jacobian(&xm)) / (2.0 * h);
        for i in 0..d {
            for j in 0..d {
                out.components[i][(j, k)] = dj[(i, j)];
            }
        }
    }
    out
}

impl<M: DynamicalMap + ?Sized> DynamicalMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).apply(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
    fn second_derivative(&self, x: &DVector<f64>) -> SecondDerivative {
        (**self).second_derivative(x)
    }
}

impl<M: DynamicalMap + ?Sized> DynamicalMap for Arc<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).apply(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
    fn second_derivative(&self, x: &DVector<f64>) -> SecondDerivative {
        (**self).second_derivative(x)
    }
}

/// Closed Euclidean ball; used for the sets `K` and `K+`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: DVector<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(dim: usize, radius: f64) -> Self {
        Self::new(DVector::zeros(dim), radius)
    }

    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        (x - &self.center).norm()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.distance(x) <= self.radius
    }
}

/// Orbit `x_1, ..., x_n` with `x_{k+1} = phi(x_k)`. When `region` is given,
/// every point must stay inside it.
pub fn iterate<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    n: usize,
    region: Option<&Ball>,
) -> Result<Vec<DVector<f64>>> {
    check_dim(map.dim(), x1.len())?;
    if n == 0 {
        return Err(Error::InvalidArgument("orbit length must be at least 1".into()));
    }
    let mut orbit = Vec::with_capacity(n);
    let mut x = x1.clone();
    for step in 1..=n {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("orbit state"));
        }
        if let Some(ball) = region {
            let distance = ball.distance(&x);
            if distance > ball.radius {
                return Err(Error::OrbitEscape { step, distance });
            }
        }
        let next = if step < n { Some(map.apply(&x)) } else { None };
        orbit.push(x);
        match next {
            Some(nx) => x = nx,
            None => break,
        }
    }
    Ok(orbit)
}

/// Tangent orbit `v_{k+1} = psi(x_k) v_k` along the orbit of `x1`.
pub fn tangent_orbit<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    v1: &DVector<f64>,
    n: usize,
) -> Result<Vec<DVector<f64>>> {
    check_dim(map.dim(), v1.len())?;
    if (v1.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "tangent seed must be a unit vector, |v1| = {}",
            v1.norm()
        )));
    }
    let orbit = iterate(map, x1, n, None)?;
    tangent_along(map, &orbit, v1)
}

pub(crate) fn tangent_along<M: DynamicalMap + ?Sized>(
    map: &M,
    orbit: &[DVector<f64>],
    v1: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(orbit.len());
    let mut v = v1.clone();
    for (k, x) in orbit.iter().enumerate() {
        if v.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroTangent { step: k + 1 });
        }
        let next = if k + 1 < orbit.len() {
            Some(map.jacobian(x) * &v)
        } else {
            None
        };
        out.push(v);
        match next {
            Some(nv) => v = nv,
            None => break,
        }
    }
    Ok(out)
}

/// Maximum relative error between the analytic Jacobian and central
/// differences of the map at the given points.
pub fn jacobian_fd_error<M: DynamicalMap + ?Sized>(map: &M, points: &[DVector<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let analytic = map.jacobian(x);
        let h = 1e-6 * (1.0 + x.norm());
        let mut fd = DMatrix::zeros(map.dim(), map.dim());
        for k in 0..map.dim() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            fd.set_column(k, &((map.apply(&xp) - map.apply(&xm)) / (2.0 * h)));
        }
        let err = (&analytic - &fd).norm() / analytic.norm().max(1.0);
        worst = worst.max(err);
    }
    worst
}

/// Maximum relative error between `second_derivative` and central
/// differences of the Jacobian.
pub fn second_derivative_fd_error<M: DynamicalMap + ?Sized>(
    map: &M,
    points: &[DVector<f64>],
) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let analytic = map.second_derivative(x);
        let fd = fd_second_derivative(map, x);
        let scale = analytic
            .components
            .iter()
            .map(|h| h.norm())
            .fold(1.0, f64::max);
        for (a, f) in analytic.components.iter().zip(&fd.components) {
            worst = worst.max((a - f).norm() / scale);
        }
    }
    worst
}
