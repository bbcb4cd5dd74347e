//! Delay maps observed through the first coordinate, their differences and
//! tangents, first-order coefficient sensitivities, and the case analysis of
//! pairs of orbits.

mod cases;
mod sensitivity;

pub use cases::{classify_pair, CaseReport, CaseTag, ORBIT_TOLERANCE};
pub use sensitivity::{
    sensitivity_h, sensitivity_v, tangent_remainder_order, taylor_remainder_order,
    SensitivityState,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynsys::{iterate, tangent_orbit, Ball, DynamicalMap};
use crate::error::{check_dim, Error, Result};
use crate::polybasis::PolyBasis;

/// Embedding dimension `D` and an optional working region `K+` that every
/// orbit must stay inside. The observation is always the first coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayConfig {
    pub embedding_dim: usize,
    pub region: Option<Ball>,
}

impl DelayConfig {
    pub fn new(embedding_dim: usize) -> Result<Self> {
        if embedding_dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
        }
        Ok(Self {
            embedding_dim,
            region: None,
        })
    }

    pub fn with_region(mut self, region: Ball) -> Self {
        self.region = Some(region);
        self
    }

    /// Monomials of degree at most `2D - 1` in `dim` variables.
    pub fn default_basis(&self, dim: usize) -> Result<PolyBasis> {
        PolyBasis::enumerate(dim, (2 * self.embedding_dim - 1) as u32)
    }

    pub(crate) fn orbit<M: DynamicalMap + ?Sized>(
        &self,
        map: &M,
        x1: &DVector<f64>,
        n: usize,
    ) -> Result<Vec<DVector<f64>>> {
        iterate(map, x1, n, self.region.as_ref())
    }
}

/// `F(x1) = (x_1[0], ..., x_D[0])`.
pub fn delay_map<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<DVector<f64>> {
    let orbit = config.orbit(map, x1, config.embedding_dim)?;
    Ok(observe(&orbit))
}

pub(crate) fn observe(orbit: &[DVector<f64>]) -> DVector<f64> {
    DVector::from_iterator(orbit.len(), orbit.iter().map(|x| x[0]))
}

/// `G(x1, y1) = F(x1) - F(y1)`.
pub fn delay_difference<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    y1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<DVector<f64>> {
    Ok(delay_map(map, x1, config)? - delay_map(map, y1, config)?)
}

/// `dF(x1, v1) = (v_1[0], ..., v_D[0])` along the tangent orbit of a unit `v1`.
pub fn delay_tangent<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    v1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<DVector<f64>> {
    config.orbit(map, x1, config.embedding_dim)?;
    let tangent = tangent_orbit(map, x1, v1, config.embedding_dim)?;
    Ok(observe(&tangent))
}

/// The `D x d` Jacobian of the delay map; row `k` is the first row of
/// `psi(x_k) ... psi(x_1)`.
pub fn delay_jacobian<M: DynamicalMap + ?Sized>(
    map: &M,
    x1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<DMatrix<f64>> {
    check_dim(map.dim(), x1.len())?;
    let orbit = config.orbit(map, x1, config.embedding_dim)?;
    Ok(jacobian_along(map, &orbit))
}

pub(crate) fn jacobian_along<M: DynamicalMap + ?Sized>(map: &M, orbit: &[DVector<f64>]) -> DMatrix<f64> {
    let d = map.dim();
    let mut out = DMatrix::zeros(orbit.len(), d);
    let mut prod = DMatrix::identity(d, d);
    for (k, x) in orbit.iter().enumerate() {
        out.set_row(k, &prod.row(0));
        if k + 1 < orbit.len() {
            prod = map.jacobian(x) * prod;
        }
    }
    out
}
