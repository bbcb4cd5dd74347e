use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fit::least_squares_line;

fn distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Farthest-point traversal: `order[k]` is the point farthest from
/// `order[..k]`, and `radii[k]` is that distance. Any prefix whose next
/// radius is at most `eps` is an `eps`-cover with centers in the cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct FarthestPointOrder {
    pub order: Vec<usize>,
    pub radii: Vec<f64>,
}

impl FarthestPointOrder {
    /// Traverses until the covering radius drops to `stop_radius` or below.
    pub fn compute(points: &[DVector<f64>], stop_radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("cannot cover an empty cloud".into()));
        }
        let dim = points[0].len();
        for p in points {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("point cloud"));
            }
        }
        let mut order = vec![0];
        let mut radii = vec![f64::INFINITY];
        let mut dist: Vec<f64> = points.iter().map(|p| distance(p, &points[0])).collect();
        loop {
            // Lowest index wins ties.
            let (next, far) = dist
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
            if far <= stop_radius || far == 0.0 {
                radii.push(far);
                break;
            }
            order.push(next);
            radii.push(far);
            for (i, p) in points.iter().enumerate() {
                let d = distance(p, &points[next]);
                if d < dist[i] {
                    dist[i] = d;
                }
            }
        }
        // `radii` has one trailing entry: the covering radius of the full order.
        Ok(Self { order, radii })
    }

    /// Number of centers needed for radius `eps`.
    pub fn count(&self, epsilon: f64) -> usize {
        (1..self.radii.len())
            .find(|&k| self.radii[k] <= epsilon)
            .unwrap_or(self.order.len())
    }

    /// Covering radius of the full traversal.
    pub fn final_radius(&self) -> f64 {
        *self.radii.last().expect("radii is never empty")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    /// Indices into the input cloud.
    pub centers: Vec<usize>,
    pub epsilon: f64,
    /// `assignments[i]` is the input index of the center covering point `i`.
    pub assignments: Vec<usize>,
    pub max_distance: f64,
}

impl CoverResult {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Greedy farthest-point cover from the first point; deterministic in the
/// input order.
pub fn greedy_cover(points: &[DVector<f64>], epsilon: f64) -> Result<CoverResult> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let fpo = FarthestPointOrder::compute(points, epsilon)?;
    let k = fpo.count(epsilon);
    let centers = fpo.order[..k].to_vec();
    let mut assignments = Vec::with_capacity(points.len());
    let mut max_distance: f64 = 0.0;
    for p in points {
        let (best, d) = centers
            .iter()
            .map(|&c| (c, distance(p, &points[c])))
            .fold((usize::MAX, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
        assignments.push(best);
        max_distance = max_distance.max(d);
    }
    Ok(CoverResult {
        centers,
        epsilon,
        assignments,
        max_distance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimEstimate {
    pub dimension: f64,
    pub c_k: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit_residual: f64,
    /// All counts were equal; the dimension is reported as zero.
    pub degenerate: bool,
}

/// Fits `log N(eps) = dim * log(1/eps) + log c_k` over a decreasing ladder.
pub fn box_dimension(points: &[DVector<f64>], scales: &[f64]) -> Result<BoxDimEstimate> {
    if scales.len() < 4 {
        return Err(Error::InvalidArgument("box dimension needs at least four scales".into()));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("scales must be positive and decreasing".into()));
    }
    let smallest = *scales.last().expect("at least four scales");
    let fpo = FarthestPointOrder::compute(points, smallest)?;
    let counts: Vec<usize> = scales.iter().map(|&e| fpo.count(e)).collect();
    if counts.iter().all(|&c| c == counts[0]) {
        return Ok(BoxDimEstimate {
            dimension: 0.0,
            c_k: counts[0] as f64,
            scales: scales.to_vec(),
            counts,
            fit_residual: 0.0,
            degenerate: true,
        });
    }
    let x: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = least_squares_line(&x, &y)?;
    Ok(BoxDimEstimate {
        dimension: fit.slope.max(0.0),
        c_k: fit.intercept.exp(),
        scales: scales.to_vec(),
        counts,
        fit_residual: fit.residual,
        degenerate: false,
    })
}
