//! Least-squares line fits and remainder-order estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Ordinary least squares `y ~ slope * x + intercept`.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("a line fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("line fit data"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (slope * a + intercept);
            e * e
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Outcome of fitting `log |remainder|` against `log t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemainderOrder {
    Slope { slope: f64, ts: Vec<f64>, remainders: Vec<f64> },
    /// The remainder sits at roundoff level already at the largest `t`.
    ExactlyLinear { max_remainder: f64 },
}

impl RemainderOrder {
    pub fn slope(&self) -> Option<f64> {
        match self {
            Self::Slope { slope, .. } => Some(*slope),
            Self::ExactlyLinear { .. } => None,
        }
    }

    pub fn is_exactly_linear(&self) -> bool {
        matches!(self, Self::ExactlyLinear { .. })
    }
}

pub(crate) fn check_ladder(ts: &[f64]) -> Result<()> {
    if ts.len() < 3 {
        return Err(Error::InvalidArgument("the t ladder needs at least three values".into()));
    }
    if ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) || ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("the t ladder must be positive and decreasing".into()));
    }
    Ok(())
}

/// Fits the order of `remainders[i]` in `ts[i]`. `scale` sets the roundoff
/// floor `1e2 * eps * max(1, scale)` below which the expansion is exact.
pub fn remainder_order(ts: &[f64], remainders: &[f64], scale: f64) -> Result<RemainderOrder> {
    check_ladder(ts)?;
    let floor = 1e2 * f64::EPSILON * scale.max(1.0);
    let max_remainder = remainders.iter().copied().fold(0.0, f64::max);
    if remainders[0] <= floor {
        return Ok(RemainderOrder::ExactlyLinear { max_remainder });
    }
    if remainders.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidArgument(
            "a remainder vanished below the largest step; use a coarser ladder".into(),
        ));
    }
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = remainders.iter().map(|r| r.ln()).collect();
    let fit = least_squares_line(&lx, &ly)?;
    Ok(RemainderOrder::Slope {
        slope: fit.slope,
        ts: ts.to_vec(),
        remainders: remainders.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line() {
        let f = least_squares_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_relative_eq!(f.slope, 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.intercept, 1.0, epsilon = 1e-14);
        assert!(f.residual < 1e-14);
        assert!(least_squares_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn quadratic_remainder_has_slope_two() {
        let ts = [1e-2, 1e-3, 1e-4, 1e-5];
        let rs: Vec<f64> = ts.iter().map(|t| 3.0 * t * t).collect();
        let o = remainder_order(&ts, &rs, 1.0).unwrap();
        assert_relative_eq!(o.slope().unwrap(), 2.0, epsilon = 1e-12);
        let o = remainder_order(&ts, &[0.0; 4], 1.0).unwrap();
        assert!(o.is_exactly_linear());
        assert!(remainder_order(&[1e-3, 1e-2, 1e-4], &rs[..3], 1.0).is_err());
    }
}
