use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::DelayConfig;
use crate::dynsys::{iterate, DynamicalMap};
use crate::error::{check_dim, Error, Result};
use crate::polybasis::PolyBasis;
use crate::structmat::{
    circulant, difference, numerical_rank, vandermonde, RankCertificate, StructuredMatrix,
    DEFAULT_REL_TOLERANCE,
};

/// Points closer than this are treated as equal when comparing orbits.
pub const ORBIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Both periodic, distinct orbits.
        DistinctPeriodic,
    /// Both periodic, same orbit.
        SamePeriodic,
    /// `2D` distinct iterates.
        Generic,
    /// Overlapping non-periodic orbits, `y1 = x_j` or `x1 = y_j`.
        Overlap,
    /// Exactly one of the two points is periodic.
        OnePeriodic,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DistinctPeriodic => "distinct_periodic",
            Self::SamePeriodic => "same_periodic",
            Self::Generic => "generic",
            Self::Overlap => "overlap",
            Self::OnePeriodic => "one_periodic",
        })
    }
}

/// Compressed factorisation `M = J_c V_c` of the difference matrix for a
/// pair, with the certified rank of the product.
#[derive(Clone, Debug)]
pub struct CaseReport {
    pub tag: CaseTag,
    pub compressed_j: StructuredMatrix,
    pub compressed_v: StructuredMatrix,
    pub product_rank: RankCertificate,
    pub period_x: Option<usize>,
    pub period_y: Option<usize>,
    /// `j` with `y1 = x_j`, or with `x1 = y_j` when `swapped` is set.
    pub overlap_index: Option<usize>,
    /// True when the roles of `x1` and `y1` were exchanged to reach the
    /// canonical form.
    pub swapped: bool,
}

fn period(orbit: &[DVector<f64>]) -> Option<usize> {
    (1..orbit.len()).find(|&p| (&orbit[p] - &orbit[0]).norm() <= ORBIT_TOLERANCE)
}

fn first_match(x: &DVector<f64>, orbit: &[DVector<f64>], range: std::ops::Range<usize>) -> Option<usize> {
    range
        .into_iter()
        .find(|&k| k < orbit.len() && (&orbit[k] - x).norm() <= ORBIT_TOLERANCE)
}

fn unit_row(len: usize, sign: f64) -> Vec<f64> {
    let mut r = vec![0.0; len];
    r[0] = sign;
    r
}

fn hstack(a: &StructuredMatrix, b: &StructuredMatrix) -> StructuredMatrix {
    let mut m = nalgebra::DMatrix::zeros(a.rows(), a.cols() + b.cols());
    m.view_mut((0, 0), (a.rows(), a.cols())).copy_from(&a.entries);
    m.view_mut((0, a.cols()), (b.rows(), b.cols())).copy_from(&b.entries);
    StructuredMatrix::new(crate::structmat::MatrixKind::Circulant, m)
}

/// Classifies the pair `(x1, y1)` and builds `J_c` and `V_c` with the
/// monomials in `basis` evaluated along the unperturbed orbits.
pub fn classify_pair<M: DynamicalMap + ?Sized>(
    map: &M,
    basis: &PolyBasis,
    x1: &DVector<f64>,
    y1: &DVector<f64>,
    config: &DelayConfig,
) -> Result<CaseReport> {
    check_dim(map.dim(), x1.len())?;
    check_dim(map.dim(), y1.len())?;
    if (x1 - y1).norm() <= ORBIT_TOLERANCE {
        return Err(Error::InvalidArgument("classify_pair needs x1 != y1".into()));
    }
    let dd = config.embedding_dim;
    // Orbits of length 2D expose every period below 2D.
    let ox = iterate(map, x1, 2 * dd, config.region.as_ref())?;
    let oy = iterate(map, y1, 2 * dd, config.region.as_ref())?;
    let (px, py) = (period(&ox), period(&oy));

    let build = |tag: CaseTag,
                 j: StructuredMatrix,
                 pts: Vec<DVector<f64>>,
                 overlap_index: Option<usize>,
                 swapped: bool|
     -> Result<CaseReport> {
        let v = vandermonde(basis, &pts)?;
        let product_rank = numerical_rank(&(&j.entries * &v.entries), DEFAULT_REL_TOLERANCE)?;
        let (period_x, period_y) = if swapped { (py, px) } else { (px, py) };
        Ok(CaseReport {
            tag,
            compressed_j: j,
            compressed_v: v,
            product_rank,
            period_x,
            period_y,
            overlap_index,
            swapped,
        })
    };

    match (px, py) {
        (Some(p), Some(q)) => {
            if let Some(k) = first_match(y1, &ox, 1..p) {
                let mut row = unit_row(p, 1.0);
                row[k] = -1.0;
                let j = circulant(&row, dd)?;
                build(CaseTag::SamePeriodic, j, ox[..p].to_vec(), Some(k + 1), false)
            } else {
                let (p, q) = (p.min(dd), q.min(dd));
                let j = hstack(&circulant(&unit_row(p, 1.0), dd)?, &circulant(&unit_row(q, -1.0), dd)?);
                let pts = ox[..p].iter().chain(&oy[..q]).cloned().collect();
                build(CaseTag::DistinctPeriodic, j, pts, None, false)
            }
        }
        (Some(_), None) | (None, Some(_)) => {
            let swapped = px.is_none();
            let (o_per, o_other, p) = if swapped { (&oy, &ox, py.unwrap()) } else { (&ox, &oy, px.unwrap()) };
            let p = p.min(dd);
            let j = hstack(&circulant(&unit_row(p, 1.0), dd)?, &circulant(&unit_row(dd, -1.0), dd)?);
            let pts = o_per[..p].iter().chain(&o_other[..dd]).cloned().collect();
            build(CaseTag::OnePeriodic, j, pts, None, swapped)
        }
        (None, None) => {
            let forward = first_match(y1, &ox, 1..dd);
            let backward = first_match(x1, &oy, 1..dd);
            match (forward, backward) {
                (Some(k), _) | (None, Some(k)) => {
                    let swapped = forward.is_none();
                    let jj = k + 1;
                    let width = dd + jj - 1;
                    let mut row = vec![0.0; width];
                    row[0] = 1.0;
                    row[jj - 1] = -1.0;
                    let j = circulant(&row, dd)?;
                    let base = if swapped { &oy } else { &ox };
                    build(CaseTag::Overlap, j, base[..width].to_vec(), Some(jj), swapped)
                }
                (None, None) => {
                    let pts = ox[..dd].iter().chain(&oy[..dd]).cloned().collect();
                    build(CaseTag::Generic, difference(dd), pts, None, false)
                }
            }
        }
    }
}
