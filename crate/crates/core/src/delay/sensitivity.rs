use nalgebra::{DMatrix, DVector};

use super::{observe, DelayConfig};
use crate::dynsys::{tangent_along, DynamicalMap, PerturbedSystem};
use crate::error::{check_dim, Error, Result};
use crate::fit::{check_ladder, remainder_order, RemainderOrder};
use crate::polybasis::PolyBasis;
use crate::structmat::{MatrixKind, StructuredMatrix};

/// Derivatives with respect to the perturbation coefficients at `c = 0`:
/// `s[j] = d x~_j / dc` and, with a tangent seed, `t[j] = d w_j / dc`.
#[derive(Clone, Debug)]
pub struct SensitivityState {
    pub orbit: Vec<DVector<f64>>,
    pub tangent: Option<Vec<DVector<f64>>>,
    pub s: Vec<DMatrix<f64>>,
    pub t: Option<Vec<DMatrix<f64>>>,
}

impl SensitivityState {
    /// Runs the forward recursion over an orbit of `n` points.
    pub fn compute<M: DynamicalMap + ?Sized>(
        map: &M,
        basis: &PolyBasis,
        x1: &DVector<f64>,
        v1: Option<&DVector<f64>>,
        config: &DelayConfig,
        n: usize,
    ) -> Result<Self> {
        let d = map.dim();
        check_dim(d, basis.dim())?;
        check_dim(d, x1.len())?;
        let orbit = config.orbit(map, x1, n)?;
        let tangent = match v1 {
            Some(v) => {
                check_dim(d, v.len())?;
                if (v.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument("tangent seed must be a unit vector".into()));
                }
                Some(tangent_along(map, &orbit, v)?)
            }
            None => None,
        };
        let m = basis.len();
        let mut s = Vec::with_capacity(n);
        let mut t = tangent.as_ref().map(|_| Vec::with_capacity(n));
        let mut sj = DMatrix::zeros(d, m);
        let mut tj = DMatrix::zeros(d, m);
        for j in 0..n {
            s.push(sj.clone());
            if let Some(t) = t.as_mut() {
                t.push(tj.clone());
            }
            if j + 1 == n {
                break;
            }
            let x = &orbit[j];
            let psi = map.jacobian(x);
            let p = basis.eval_monomials(x.as_slice())?;
            if let Some(tan) = tangent.as_ref() {
                let vj = &tan[j];
                let hess = map.second_derivative(x);
                let grads = basis.eval_monomial_gradients(x.as_slice())?;
                let gv = grads.transpose() * vj;
                let mut next = &psi * &tj;
                for k in 0..m {
                    let col = sj.column(k).into_owned();
                    let curv = hess.contract(&col, vj);
                    let mut c = next.column_mut(k);
                    c += curv;
                    c[0] += gv[k];
                }
                tj = next;
            }
            let mut next = &psi * &sj;
            for k in 0..m {
                next[(0, k)] += p[k];
            }
            sj = next;
        }
        Ok(Self { orbit, tangent, s, t })
    }

    /// First-coordinate rows of `s[j]` for `j = 2..n`.
    pub fn v_matrix(&self) -> StructuredMatrix {
        StructuredMatrix::new(MatrixKind::Sensitivity, first_rows(&self.s[1..]))
    }

    /// First-coordinate rows of `t[j]` for `j = 2..n`; `None` without a tangent seed.
    pub fn h_matrix(&self) -> Option<StructuredMatrix> {
        self.t
            .as_ref()
            .map(|t| StructuredMatrix::new(MatrixKind::Sensitivity, first_rows(&t[1..])))
    }

    /// The full `n x |basis|` coefficient Jacobian of the delay map; row 1 is zero.
    pub fn delay_c_jacobian(&self) -> DMatrix<f64> {
        first_rows(&self.s)
    }
}

fn first_rows(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let mut out = DMatrix::zeros(blocks.len(), cols);
    for (i, b) in blocks.iter().enumerate() {
        out.set_row(i, &b.row(0));
    }
    out
}

/// `V(x1)`, a `(D - 1) x |basis|` matrix.
pub fn sensitivity_v<M: DynamicalMap + ?Sized>(
    map: &M,
    basis: &PolyBasis,
    x1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<StructuredMatrix> {
    Ok(SensitivityState::compute(map, basis, x1, None, config, config.embedding_dim)?.v_matrix())
}

/// `H(x1, v1)`, a `(D - 1) x |basis|` matrix.
pub fn sensitivity_h<M: DynamicalMap + ?Sized>(
    map: &M,
    basis: &PolyBasis,
    x1: &DVector<f64>,
    v1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<StructuredMatrix> {
    let state = SensitivityState::compute(map, basis, x1, Some(v1), config, config.embedding_dim)?;
    Ok(state.h_matrix().expect("tangent seed was supplied"))
}

fn unit_direction(basis: &PolyBasis, direction: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(basis.len(), direction.len())?;
    let n = direction.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument("direction must be a nonzero finite vector".into()));
    }
    Ok(direction / n)
}

/// Order in `t` of `|F_{t c} - F_0 - t (0; V) c|` for a unit direction `c`.
pub fn taylor_remainder_order<M: DynamicalMap + Clone>(
    map: &M,
    basis: &PolyBasis,
    x1: &DVector<f64>,
    config: &DelayConfig,
    direction: &DVector<f64>,
    ts: &[f64],
) -> Result<RemainderOrder> {
    check_ladder(ts)?;
    let c = unit_direction(basis, direction)?;
    let n = config.embedding_dim;
    let state = SensitivityState::compute(map, basis, x1, None, config, n)?;
    let f0 = observe(&state.orbit);
    let lin = state.delay_c_jacobian() * &c;
    let mut rs = Vec::with_capacity(ts.len());
    for &t in ts {
        let pert = PerturbedSystem::new(map.clone(), basis.clone(), &c * t, t)?;
        let ft = observe(&config.orbit(&pert, x1, n)?);
        rs.push((ft - &f0 - &lin * t).norm());
    }
    remainder_order(ts, &rs, f0.norm())
}

/// Order in `t` of `|dF_{t c} - dF_0 - t (0; H) c|`.
pub fn tangent_remainder_order<M: DynamicalMap + Clone>(
    map: &M,
    basis: &PolyBasis,
    x1: &DVector<f64>,
    v1: &DVector<f64>,
    config: &DelayConfig,
    direction: &DVector<f64>,
    ts: &[f64],
) -> Result<RemainderOrder> {
    check_ladder(ts)?;
    let c = unit_direction(basis, direction)?;
    let n = config.embedding_dim;
    let state = SensitivityState::compute(map, basis, x1, Some(v1), config, n)?;
    let df0 = observe(state.tangent.as_ref().expect("tangent seed was supplied"));
    let lin = first_rows(state.t.as_ref().expect("tangent seed was supplied")) * &c;
    let mut rs = Vec::with_capacity(ts.len());
    for &t in ts {
        let pert = PerturbedSystem::new(map.clone(), basis.clone(), &c * t, t)?;
        let orbit = config.orbit(&pert, x1, n)?;
        let dft = observe(&tangent_along(&pert, &orbit, v1)?);
        rs.push((dft - &df0 - &lin * t).norm());
    }
    remainder_order(ts, &rs, df0.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::BuiltinSystem;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn v_matrix_by_hand_on_linear_system() {
        let s = BuiltinSystem::LinearDiag { a: 0.5, b: 1.0 / 3.0 };
        let basis = PolyBasis::enumerate(2, 1).unwrap();
        let c = DelayConfig::new(3).unwrap();
        let vm = sensitivity_v(&s, &basis, &v(&[1.0, 1.0]), &c).unwrap();
        assert_eq!((vm.rows(), vm.cols()), (2, 3));
        let e = &vm.entries;
        assert_eq!(e.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
        assert_relative_eq!(e[(1, 0)], 1.5, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 1)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 2)], 1.0 / 3.0 + 0.5, epsilon = 1e-15);
    }

    #[test]
    fn first_row_of_c_jacobian_is_zero() {
        let s = BuiltinSystem::henon();
        let c = DelayConfig::new(4).unwrap();
        let basis = c.default_basis(2).unwrap();
        let st = SensitivityState::compute(&s, &basis, &v(&[0.1, 0.2]), Some(&v(&[1.0, 0.0])), &c, 4).unwrap();
        assert!(st.delay_c_jacobian().row(0).iter().all(|x| *x == 0.0));
        assert_eq!(st.h_matrix().unwrap().rows(), 3);
    }

    #[test]
    fn constants_only_basis_gives_zero_h_for_linear_map() {
        let s = BuiltinSystem::LinearDiag { a: 0.5, b: 1.0 / 3.0 };
        let basis = PolyBasis::enumerate(2, 0).unwrap();
        let c = DelayConfig::new(4).unwrap();
        let h = sensitivity_h(&s, &basis, &v(&[0.3, 0.1]), &v(&[0.6, 0.8]), &c).unwrap();
        assert!(h.entries.iter().all(|x| *x == 0.0));
        let ts = [1e-2, 1e-3, 1e-4, 1e-5];
        let o = taylor_remainder_order(&s, &basis, &v(&[0.3, 0.1]), &c, &v(&[1.0]), &ts).unwrap();
        assert!(o.is_exactly_linear());
    }

    #[test]
    fn henon_remainders_are_quadratic() {
        let s = BuiltinSystem::henon();
        let c = DelayConfig::new(3).unwrap();
        let basis = PolyBasis::enumerate(2, 3).unwrap();
        let dir = DVector::from_fn(basis.len(), |i, _| ((i as f64) * 0.7).sin() + 0.1);
        let ts = [1e-2, 1e-3, 1e-4, 1e-5];
        let x1 = v(&[0.2, 0.1]);
        let o = taylor_remainder_order(&s, &basis, &x1, &c, &dir, &ts).unwrap();
        assert!((o.slope().unwrap() - 2.0).abs() < 0.15, "{o:?}");
        let o = tangent_remainder_order(&s, &basis, &x1, &v(&[0.6, -0.8]), &c, &dir, &ts).unwrap();
        assert!((o.slope().unwrap() - 2.0).abs() < 0.15, "{o:?}");
    }
}
