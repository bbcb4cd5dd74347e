//! Monomial bases over `R^d`.
//!
//! A [`PolyBasis`] holds every multi-index `alpha` with `|alpha| <= max_degree`
//! in graded lexicographic order: degree-major, and within one degree the
//! exponent tuples are sorted in decreasing lexicographic order, so for
//! `d = 2` the degree-one block is `z1, z2`. The order is fixed because
//! coefficient vectors are indexed by it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Exponent tuple of a monomial `z^alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }
}

/// `binomial(n, k)` in `u128`; callers stay far below overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// The ordered index set of all monomials of total degree at most `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyBasis {
    dim: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
}

impl PolyBasis {
    /// Enumerates the basis for ambient dimension `dim`.
    pub fn enumerate(dim: usize, max_degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "ambient dimension must be at least 1".into(),
            ));
        }
        let mut indices = Vec::new();
        let mut scratch = vec![0u32; dim];
        for degree in 0..=max_degree {
            push_compositions(degree, 0, &mut scratch, &mut indices);
        }
        Ok(Self {
            dim,
            max_degree,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Number of monomials, `binomial(dim + max_degree, max_degree)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|m| m == alpha)
    }

    /// Row of monomial values `p_alpha(z)`.
    pub fn eval_monomials(&self, z: &[f64]) -> Result<DVector<f64>> {
        check_dim(self.dim, z.len())?;
        let powers = self.power_table(z);
        Ok(DVector::from_iterator(
            self.len(),
            self.indices.iter().map(|alpha| {
                alpha
                    .exponents
                    .iter()
                    .enumerate()
                    .fold(1.0, |acc, (i, &e)| acc * powers[i][e as usize])
            }),
        ))
    }

    /// `dim x len` matrix whose column `alpha` is the gradient of `z^alpha`.
    pub fn eval_monomial_gradients(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, z.len())?;
        let powers = self.power_table(z);
        let mut out = DMatrix::zeros(self.dim, self.len());
        for (col, alpha) in self.indices.iter().enumerate() {
            for i in 0..self.dim {
                let ei = alpha.exponents[i];
                if ei == 0 {
                    continue;
                }
                let mut value = f64::from(ei) * powers[i][ei as usize - 1];
                for (l, &el) in alpha.exponents.iter().enumerate() {
                    if l != i {
                        value *= powers[l][el as usize];
                    }
                }
                out[(i, col)] = value;
            }
        }
        Ok(out)
    }

    /// Hessian of the polynomial `sum_alpha c_alpha z^alpha` at `z`.
    pub fn polynomial_hessian(&self, z: &[f64], coeffs: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, z.len())?;
        check_dim(self.len(), coeffs.len())?;
        let powers = self.power_table(z);
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (alpha, &c) in self.indices.iter().zip(coeffs) {
            if c == 0.0 || alpha.degree() < 2 {
                continue;
            }
            let ex = &alpha.exponents;
            for j in 0..self.dim {
                for k in j..self.dim {
                    let factor = if j == k {
                        if ex[j] < 2 {
                            continue;
                        }
                        f64::from(ex[j]) * f64::from(ex[j] - 1)
                    } else {
                        if ex[j] == 0 || ex[k] == 0 {
                            continue;
                        }
                        f64::from(ex[j]) * f64::from(ex[k])
                    };
                    let mut value = factor;
                    for (l, &el) in ex.iter().enumerate() {
                        let reduce = u32::from(l == j) + u32::from(l == k);
                        value *= powers[l][(el - reduce) as usize];
                    }
                    out[(j, k)] += c * value;
                    if j != k {
                        out[(k, j)] += c * value;
                    }
                }
            }
        }
        Ok(out)
    }

    // powers[i][e] = z_i^e by repeated multiplication.
    fn power_table(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let n = self.max_degree as usize + 1;
        z.iter()
            .map(|&zi| {
                let mut row = Vec::with_capacity(n);
                let mut acc = 1.0;
                for _ in 0..n {
                    row.push(acc);
                    acc *= zi;
                }
                row
            })
            .collect()
    }
}

// Appends every exponent tuple of total `remaining` over positions `pos..`,
// largest leading exponent first.
fn push_compositions(remaining: u32, pos: usize, scratch: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex::new(scratch.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        scratch[pos] = e;
        push_compositions(remaining - e, pos + 1, scratch, out);
    }
    scratch[pos] = 0;
}
