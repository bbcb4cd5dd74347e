//! Structured matrices built from monomial bases, and SVD-based rank
//! certificates for them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::polybasis::PolyBasis;

/// Default relative threshold on `sigma_i / sigma_1` for counting rank.
pub const DEFAULT_REL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Vandermonde,
    HermiteIncomplete,
    HermiteFull,
    Circulant,
    Difference,
    Compressed,
    Sensitivity,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuredMatrix {
    pub kind: MatrixKind,
    pub entries: DMatrix<f64>,
}

impl StructuredMatrix {
    pub fn new(kind: MatrixKind, entries: DMatrix<f64>) -> Self {
        Self { kind, entries }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// `self * rhs`, tagged as a compressed product.
    pub fn product(&self, rhs: &StructuredMatrix) -> Result<StructuredMatrix> {
        check_dim(self.cols(), rhs.rows())?;
        Ok(StructuredMatrix::new(
            MatrixKind::Compressed,
            &self.entries * &rhs.entries,
        ))
    }

    pub fn rank(&self, rel_tolerance: f64) -> Result<RankCertificate> {
        numerical_rank(&self.entries, rel_tolerance)
    }
}

/// Numerical rank together with the singular spectrum it was read from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub numerical_rank: usize,
    pub singular_values: Vec<f64>,
    pub rel_tolerance: f64,
}

impl RankCertificate {
    /// `sigma_k` with 1-based `k`; zero when the spectrum is shorter than `k`.
    pub fn sigma(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::INFINITY;
        }
        self.singular_values.get(k - 1).copied().unwrap_or(0.0)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or(Error::Singular("SVD did not converge"))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().map(|s| s.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Counts singular values above `rel_tolerance * sigma_1`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tolerance: f64) -> Result<RankCertificate> {
    if !(rel_tolerance > 0.0 && rel_tolerance < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rel_tolerance must lie in (0, 1), got {rel_tolerance}"
        )));
    }
    let singular_values = singular_values(m)?;
    let numerical_rank = match singular_values.first() {
        Some(&s1) if s1 > 0.0 => singular_values
            .iter()
            .filter(|&&s| s > rel_tolerance * s1)
            .count(),
        _ => 0,
    };
    Ok(RankCertificate {
        numerical_rank,
        singular_values,
        rel_tolerance,
    })
}

fn check_points(basis: &PolyBasis, points: &[DVector<f64>]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("at least one node is required".into()));
    }
    points.iter().try_for_each(|p| check_dim(basis.dim(), p.len()))
}

/// Rows `p_alpha(z_i)`, one per node.
pub fn vandermonde(basis: &PolyBasis, points: &[DVector<f64>]) -> Result<StructuredMatrix> {
    check_points(basis, points)?;
    let mut m = DMatrix::zeros(points.len(), basis.len());
    for (i, z) in points.iter().enumerate() {
        m.row_mut(i)
            .copy_from(&basis.eval_monomials(z.as_slice())?.transpose());
    }
    Ok(StructuredMatrix::new(MatrixKind::Vandermonde, m))
}

/// Stacked gradient blocks: `d` scalar rows per node.
pub fn hermite_incomplete(basis: &PolyBasis, points: &[DVector<f64>]) -> Result<StructuredMatrix> {
    check_points(basis, points)?;
    let d = basis.dim();
    let mut m = DMatrix::zeros(points.len() * d, basis.len());
    for (i, z) in points.iter().enumerate() {
        m.rows_mut(i * d, d)
            .copy_from(&basis.eval_monomial_gradients(z.as_slice())?);
    }
    Ok(StructuredMatrix::new(MatrixKind::HermiteIncomplete, m))
}

/// Value rows for every node, followed by the gradient blocks.
pub fn hermite_full(basis: &PolyBasis, points: &[DVector<f64>]) -> Result<StructuredMatrix> {
    let values = vandermonde(basis, points)?.entries;
    let grads = hermite_incomplete(basis, points)?.entries;
    let mut m = DMatrix::zeros(values.nrows() + grads.nrows(), basis.len());
    m.rows_mut(0, values.nrows()).copy_from(&values);
    m.rows_mut(values.nrows(), grads.nrows()).copy_from(&grads);
    Ok(StructuredMatrix::new(MatrixKind::HermiteFull, m))
}

/// `nrows` rows, each the previous one rotated one place to the right.
pub fn circulant(first_row: &[f64], nrows: usize) -> Result<StructuredMatrix> {
    if first_row.is_empty() {
        return Err(Error::InvalidArgument("circulant first row is empty".into()));
    }
    if nrows == 0 {
        return Err(Error::InvalidArgument("circulant needs at least one row".into()));
    }
    let n = first_row.len();
    let m = DMatrix::from_fn(nrows, n, |k, j| first_row[(j + n * nrows - k) % n]);
    Ok(StructuredMatrix::new(MatrixKind::Circulant, m))
}

/// First row `1, 0^{j1}, -1, 0^{j2}`.
pub fn two_spike_row(j1: usize, j2: usize) -> Vec<f64> {
    let mut row = vec![0.0; j1 + j2 + 2];
    row[0] = 1.0;
    row[j1 + 1] = -1.0;
    row
}

/// `[I_n, -I_n]`, the pair-difference operator on stacked delay rows.
pub fn difference(n: usize) -> StructuredMatrix {
    let mut m = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        m[(i, i)] = 1.0;
        m[(i, n + i)] = -1.0;
    }
    StructuredMatrix::new(MatrixKind::Difference, m)
}

/// Entry `(i, j) = lambda_j^i` for `i < nrows`.
pub fn multiplier_vandermonde(multipliers: &[f64], nrows: usize) -> Result<StructuredMatrix> {
    if nrows > multipliers.len() {
        return Err(Error::InvalidArgument(format!(
            "{nrows} rows requested from {} multipliers",
            multipliers.len()
        )));
    }
    let m = DMatrix::from_fn(nrows, multipliers.len(), |i, j| {
        let mut acc = 1.0;
        for _ in 0..i {
            acc *= multipliers[j];
        }
        acc
    });
    Ok(StructuredMatrix::new(MatrixKind::Vandermonde, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[&[f64]]) -> Vec<DVector<f64>> {
        v.iter().map(|p| DVector::from_column_slice(p)).collect()
    }

    fn separated_points(rng: &mut ChaCha8Rng, d: usize, n: usize, sep: f64) -> Vec<DVector<f64>> {
        loop {
            let p: Vec<DVector<f64>> = (0..n)
                .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let ok = (0..n).all(|i| (i + 1..n).all(|j| (&p[i] - &p[j]).norm() >= sep));
            if ok {
                return p;
            }
        }
    }

    #[test]
    fn classic_vandermonde() {
        let b = PolyBasis::enumerate(1, 2).unwrap();
        let v = vandermonde(&b, &pts(&[&[0.0], &[1.0], &[2.0]])).unwrap();
        assert_eq!(v.entries.row(2).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 4.0]);
        assert_eq!(v.rank(DEFAULT_REL_TOLERANCE).unwrap().numerical_rank, 3);
    }

    #[test]
    fn repeated_node_drops_rank() {
        let b = PolyBasis::enumerate(2, 3).unwrap();
        let p = pts(&[&[0.3, 0.1], &[0.3, 0.1], &[-0.5, 0.2]]);
        assert_eq!(vandermonde(&b, &p).unwrap().rank(1e-10).unwrap().numerical_rank, 2);
        let h = hermite_full(&b, &p).unwrap();
        assert!(h.rank(1e-10).unwrap().numerical_rank < h.rows());
    }

    #[test]
    fn random_vandermonde_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = PolyBasis::enumerate(2, 3).unwrap();
        let p = separated_points(&mut rng, 2, 4, 0.1);
        assert_eq!(vandermonde(&b, &p).unwrap().rank(1e-8).unwrap().numerical_rank, 4);
    }

    #[test]
    fn hermite_small_cases() {
        let b = PolyBasis::enumerate(1, 1).unwrap();
        let h = hermite_incomplete(&b, &pts(&[&[2.0]])).unwrap();
        assert_eq!(h.entries.as_slice(), &[0.0, 1.0]);
        assert_eq!(h.rank(1e-10).unwrap().numerical_rank, 1);

        let f = hermite_full(&b, &pts(&[&[2.0]])).unwrap();
        assert_eq!(f.entries, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]));
        assert_eq!(f.rank(1e-10).unwrap().numerical_rank, 2);

        let b0 = PolyBasis::enumerate(2, 0).unwrap();
        let z = hermite_incomplete(&b0, &pts(&[&[0.4, 0.2]])).unwrap();
        assert_eq!(z.rank(1e-10).unwrap().numerical_rank, 0);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b2 = PolyBasis::enumerate(2, 2).unwrap();
        let p = separated_points(&mut rng, 2, 2, 0.1);
        assert_eq!(hermite_incomplete(&b2, &p).unwrap().rank(1e-8).unwrap().numerical_rank, 4);
        let b3 = PolyBasis::enumerate(2, 3).unwrap();
        assert_eq!(hermite_full(&b3, &p).unwrap().rank(1e-8).unwrap().numerical_rank, 6);
    }

    #[test]
    fn counterexample_circulant_has_rank_four() {
        let c = circulant(&[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0], 6).unwrap();
        assert_eq!(c.entries.row(4).iter().copied().collect::<Vec<_>>(), vec![
            -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0
        ]);
        assert_eq!(c.rank(1e-10).unwrap().numerical_rank, 4);
    }

    #[test]
    fn circulant_rows_rotate_right() {
        let c = circulant(&[1.0, 2.0, 3.0, 4.0, 5.0], 7).unwrap();
        for k in 0..6 {
            for j in 0..5 {
                assert_eq!(c.entries[(k + 1, (j + 1) % 5)], c.entries[(k, j)]);
            }
        }
        assert_eq!(circulant(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0], 3).unwrap().rank(1e-10).unwrap().numerical_rank, 3);
        assert_eq!(circulant(&[0.0, 2.0], 1).unwrap().rank(1e-10).unwrap().numerical_rank, 1);
        assert!(circulant(&[], 2).is_err());
    }

    #[test]
    fn rank_edge_cases() {
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 4), 1e-10).unwrap().numerical_rank, 0);
        assert_eq!(numerical_rank(&DMatrix::identity(5, 5), 1e-10).unwrap().numerical_rank, 5);
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1e-16]));
        let cert = numerical_rank(&d, 1e-10).unwrap();
        assert_eq!(cert.numerical_rank, 1);
        assert_eq!(cert.singular_values, vec![1.0, 1e-16]);
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(numerical_rank(&bad, 1e-10), Err(Error::NonFinite(_))));
        assert!(numerical_rank(&DMatrix::identity(2, 2), 1.5).is_err());
    }

    #[test]
    fn multiplier_vandermonde_cases() {
        let v = multiplier_vandermonde(&[1.0, 2.0], 2).unwrap();
        assert_eq!(v.entries, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        assert_eq!(v.rank(1e-10).unwrap().numerical_rank, 2);
        assert_eq!(multiplier_vandermonde(&[0.7, 0.7], 2).unwrap().rank(1e-10).unwrap().numerical_rank, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lam: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        assert_eq!(multiplier_vandermonde(&lam, 3).unwrap().rank(1e-10).unwrap().numerical_rank, 3);
        assert!(multiplier_vandermonde(&[1.0], 2).is_err());
    }

    #[test]
    fn difference_operator() {
        let j = difference(2);
        assert_eq!(
            j.entries,
            DMatrix::from_row_slice(2, 4, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0])
        );
    }
}
