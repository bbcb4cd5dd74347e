use nalgebra::{DMatrix, DVector};

use super::{DynamicalMap, SecondDerivative};
use crate::error::{check_dim, Error, Result};
use crate::polybasis::PolyBasis;

/// `phi_c(x) = phi(x) + e_1 (p(x) . c)`: only the first coordinate is perturbed.
#[derive(Clone, Debug)]
pub struct PerturbedSystem<M> {
    base: M,
    basis: PolyBasis,
    coeffs: DVector<f64>,
    radius_a0: f64,
}

impl<M: DynamicalMap> PerturbedSystem<M> {
    pub fn new(base: M, basis: PolyBasis, coeffs: DVector<f64>, radius_a0: f64) -> Result<Self> {
        check_dim(base.dim(), basis.dim())?;
        check_dim(basis.len(), coeffs.len())?;
        // Relative slack so that `t * unit` passes with radius `t`.
        if coeffs.norm() > radius_a0 * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "coefficient norm {} exceeds the radius {radius_a0}",
                coeffs.norm()
            )));
        }
        Ok(Self {
            base,
            basis,
            coeffs,
            radius_a0,
        })
    }

    /// Unperturbed copy with a basis of degree `2D - 1`.
    pub fn unperturbed(base: M, embedding_dim: usize) -> Result<Self> {
        let basis = PolyBasis::enumerate(base.dim(), (2 * embedding_dim - 1) as u32)?;
        let n = basis.len();
        Self::new(base, basis, DVector::zeros(n), 0.0)
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn radius_a0(&self) -> f64 {
        self.radius_a0
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }
}

impl<M: DynamicalMap> DynamicalMap for PerturbedSystem<M> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn name(&self) -> String {
        format!("{}+poly(deg {})", self.base.name(), self.basis.max_degree())
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = self.base.apply(x);
        // A zero perturbation must leave base trajectories bit-identical.
        if !self.is_zero() {
            let p = self
                .basis
                .eval_monomials(x.as_slice())
                .expect("state dimension matches basis");
            y[0] += p.dot(&self.coeffs);
        }
        y
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut j = self.base.jacobian(x);
        if !self.is_zero() {
            let g = self
                .basis
                .eval_monomial_gradients(x.as_slice())
                .expect("state dimension matches basis");
            let row = g * &self.coeffs;
            for k in 0..self.dim() {
                j[(0, k)] += row[k];
            }
        }
        j
    }

    fn second_derivative(&self, x: &DVector<f64>) -> SecondDerivative {
        let mut h = self.base.second_derivative(x);
        if !self.is_zero() {
            h.components[0] += self
                .basis
                .polynomial_hessian(x.as_slice(), self.coeffs.as_slice())
                .expect("state dimension matches basis");
        }
        h
    }
}
