use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{fmt_f64, Check, CommandReport, Table};
use super::setup::{Setup, STREAM_BOUNDS};
use crate::delay::{observe, DelayConfig, SensitivityState};
use crate::dynsys::{iterate, refine_fixed_point, tangent_orbit, DynamicalMap, PerturbedSystem};
use crate::error::{Error, Result};
use crate::fit::{remainder_order, RemainderOrder};
use crate::prevalence::{
    assemble_bound, box_dimension, greedy_cover, lipschitz_estimate, remainder_constant, sigma_delta_min,
    AssembledBound, BoundCase, BoundInput, BoundMode, CoverLaw,
};
use crate::sampling::{stream_rng, unit_sphere};
use crate::structmat::{difference, vandermonde, MatrixKind, StructuredMatrix};

/// One member of the set whose image under `G` is bounded away from zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetElement {
    Pair { x: Vec<f64>, y: Vec<f64> },
    FixedPoint { xi: Vec<f64>, x: Vec<f64> },
    Shift { x: Vec<f64>, k: usize },
    Tangent { x: Vec<f64>, v: Vec<f64> },
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn concat(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn c_jacobian<M: DynamicalMap + ?Sized>(map: &M, setup: &Setup, x: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    Ok(SensitivityState::compute(map, &setup.basis, x, None, &free(n)?, n)?.delay_c_jacobian())
}

fn free(n: usize) -> Result<DelayConfig> {
    DelayConfig::new(n)
}

impl SetElement {
    /// Coordinates used for covering the set.
    pub fn cover_point<M: DynamicalMap + ?Sized>(&self, map: &M) -> Result<DVector<f64>> {
        Ok(match self {
            Self::Pair { x, y } => concat(&dv(x), &dv(y)),
            Self::FixedPoint { xi, x } => concat(&dv(xi), &dv(x)),
            Self::Shift { x, k } => {
                let o = iterate(map, &dv(x), *k, None)?;
                concat(&o[0], &o[k - 1])
            }
            Self::Tangent { x, v } => concat(&dv(x), &dv(v)),
        })
    }

    /// The quantity that must stay away from zero, under `map`.
    fn gap<M: DynamicalMap + ?Sized>(&self, map: &M, dd: usize) -> Result<DVector<f64>> {
        let f = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(observe(&iterate(map, x, dd, None)?)) };
        match self {
            Self::Pair { x, y } => Ok(f(&dv(x))? - f(&dv(y))?),
            Self::FixedPoint { xi, x } => {
                let xi = refine_fixed_point(map, &dv(xi), 1e-14)?;
                Ok(f(&xi)? - f(&dv(x))?)
            }
            Self::Shift { x, k } => {
                let o = iterate(map, &dv(x), dd + k - 1, None)?;
                Ok(observe(&o[..dd]) - observe(&o[k - 1..k - 1 + dd]))
            }
            Self::Tangent { x, v } => Ok(observe(&tangent_orbit(map, &dv(x), &dv(v), dd)?)),
        }
    }
}

/// Matrix whose `r`-th singular value controls the per-ball bound.
fn case_matrix(case: BoundCase, setup: &Setup, e: &SetElement, dd: usize) -> Result<DMatrix<f64>> {
    let map = &setup.system;
    match (case, e) {
        (BoundCase::ObservationPairs, SetElement::Pair { x, y }) => {
            let mut nodes = iterate(map, &dv(x), dd, None)?;
            nodes.extend(iterate(map, &dv(y), dd, None)?);
            Ok(difference(dd).product(&vandermonde(&setup.basis, &nodes)?)?.entries)
        }
        (BoundCase::SeparatedPairs, SetElement::Pair { x, y }) => {
            Ok(c_jacobian(map, setup, &dv(x), dd)? - c_jacobian(map, setup, &dv(y), dd)?)
        }
        (BoundCase::FixedPointPairs, SetElement::FixedPoint { xi, x }) => {
            let xi = dv(xi);
            let d = map.dim();
            let a = DMatrix::identity(d, d) - map.jacobian(&xi);
            let inv = a.try_inverse().ok_or(Error::Singular("I - psi at a fixed point"))?;
            let p = setup.basis.eval_monomials(xi.as_slice())?;
            let w = p.transpose() * inv[(0, 0)];
            let mut m = -c_jacobian(map, setup, &dv(x), dd)?;
            for mut row in m.row_iter_mut() {
                row += &w;
            }
            Ok(m)
        }
        (BoundCase::ShiftPairs, SetElement::Shift { x, k }) => {
            let c = c_jacobian(map, setup, &dv(x), dd + k - 1)?;
            Ok(c.rows(0, dd) - c.rows(k - 1, dd))
        }
        (BoundCase::TangentDirections, SetElement::Tangent { x, v }) => {
            let state = SensitivityState::compute(map, &setup.basis, &dv(x), Some(&dv(v)), &free(dd)?, dd)?;
            let h = state.h_matrix().expect("tangent seed was supplied").entries;
            let mut m = DMatrix::zeros(dd, h.ncols());
            m.rows_mut(1, dd - 1).copy_from(&h);
            Ok(m)
        }
        _ => Err(Error::InvalidArgument(format!("{} does not apply to {e:?}", case.name()))),
    }
}

fn admissible_point(setup: &Setup, x: &DVector<f64>, delta: f64) -> bool {
    setup.fixed.points.iter().all(|xi| (x - xi).norm() >= 3.0 * delta)
}

fn separated_pair(setup: &Setup, x: &DVector<f64>, y: &DVector<f64>, dd: usize, delta: f64) -> Result<bool> {
    if (x - y).norm() < delta || !admissible_point(setup, x, delta) || !admissible_point(setup, y, delta) {
        return Ok(false);
    }
    let ox = iterate(&setup.system, x, dd, None)?;
    let oy = iterate(&setup.system, y, dd, None)?;
    Ok((1..dd).all(|j| (x - &oy[j]).norm() >= 2.0 * delta && (y - &ox[j]).norm() >= 2.0 * delta))
}

/// Samples `n` members of the set for `case`. Pair sets draw from the
/// cloud with the same predicates as the embedding experiment.
pub fn sample_set(case: BoundCase, setup: &Setup, cfg: &ExperimentConfig, n: usize) -> Result<Vec<SetElement>> {
    let dd = cfg.embedding_dim;
    let mut rng = stream_rng(cfg.master_seed, STREAM_BOUNDS + 1 + case as u64);
    let cloud = &setup.cloud;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 100 * n.max(1) {
        attempts += 1;
        let x = &cloud[rng.random_range(0..cloud.len())];
        match case {
            BoundCase::ObservationPairs | BoundCase::SeparatedPairs => {
                let y = &cloud[rng.random_range(0..cloud.len())];
                if separated_pair(setup, x, y, dd, cfg.delta)? {
                    out.push(SetElement::Pair { x: x.as_slice().to_vec(), y: y.as_slice().to_vec() });
                }
            }
            BoundCase::FixedPointPairs => {
                if setup.fixed.is_empty() {
                    break;
                }
                let xi = &setup.fixed.points[out.len() % setup.fixed.len()];
                if admissible_point(setup, x, cfg.delta) {
                    out.push(SetElement::FixedPoint { xi: xi.as_slice().to_vec(), x: x.as_slice().to_vec() });
                }
            }
            BoundCase::ShiftPairs => {
                if dd < 2 {
                    break;
                }
                let k = 2 + out.len() % (dd - 1);
                if admissible_point(setup, x, cfg.delta) {
                    out.push(SetElement::Shift { x: x.as_slice().to_vec(), k });
                }
            }
            BoundCase::TangentDirections => {
                let v = unit_sphere(&mut rng, x.len());
                out.push(SetElement::Tangent { x: x.as_slice().to_vec(), v: v.as_slice().to_vec() });
            }
        }
    }
    if out.len() < 2 {
        return Err(Error::Hypothesis(format!("could not sample the {} set", case.name())));
    }
    Ok(out)
}

/// Constant in the cover law of a set built from the cloud's cover law.
fn cover_constant(case: BoundCase, c_k: f64, d: usize, dd: usize, n_fixed: usize) -> f64 {
    match case {
        BoundCase::ObservationPairs | BoundCase::SeparatedPairs => c_k * c_k,
        BoundCase::FixedPointPairs => c_k * n_fixed.max(1) as f64,
        BoundCase::ShiftPairs => c_k * (dd - 1) as f64,
        // (1 + 2/eps)^(d-1) <= (3/eps)^(d-1) balls cover the unit sphere up to a factor 2d
        BoundCase::TangentDirections => c_k * 2.0 * d as f64 * 3f64.powi(d as i32 - 1),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseBound {
    pub case: BoundCase,
    pub set_size: usize,
    pub cover_size: usize,
    pub sigma_delta: f64,
    pub sigma_witness: SetElement,
    pub lipschitz: f64,
    pub remainder: Option<RemainderOrder>,
    pub bound: Option<AssembledBound>,
}

impl CaseBound {
    pub fn crossover(&self) -> Option<f64> {
        self.bound.and_then(|b| b.crossover())
    }
}

fn remainder_at(case: BoundCase, setup: &Setup, e: &SetElement, cfg: &ExperimentConfig) -> Result<(RemainderOrder, f64)> {
    let dd = cfg.embedding_dim;
    let m = case_matrix(case, setup, e, dd)?;
    let u = unit_sphere(&mut stream_rng(cfg.master_seed, STREAM_BOUNDS), setup.basis.len());
    let g0 = e.gap(&setup.system, dd)?;
    let mut rs = Vec::with_capacity(cfg.t_ladder.len());
    for &t in &cfg.t_ladder {
        let c = &u * t;
        let pert = PerturbedSystem::new(setup.system, setup.basis.clone(), c.clone(), t)?;
        let gc = e.gap(&pert, dd)?;
        rs.push((gc - &g0 - &m * c).norm());
    }
    let constant = remainder_constant(&cfg.t_ladder, &rs)?;
    Ok((remainder_order(&cfg.t_ladder, &rs, g0.norm())?, constant))
}

pub fn evaluate_case(case: BoundCase, setup: &Setup, cfg: &ExperimentConfig, c_k: f64) -> Result<CaseBound> {
    let d = setup.system.dim();
    let dd = cfg.embedding_dim;
    let set = sample_set(case, setup, cfg, cfg.bound_samples)?;
    let points = set.iter().map(|e| e.cover_point(&setup.system)).collect::<Result<Vec<_>>>()?;
    let cover = greedy_cover(&points, cfg.cover_epsilon)?;
    let r = case.rank(dd);
    let sigma = sigma_delta_min(
        &cover,
        |i| Ok(StructuredMatrix::new(MatrixKind::General, case_matrix(case, setup, &set[i], dd)?)),
        r,
    )?;
    let samples = set
        .iter()
        .zip(&points)
        .map(|(e, p)| Ok((p.clone(), e.gap(&setup.system, dd)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut lipschitz = lipschitz_estimate(&samples)?;
    let witness = set[sigma.argmin].clone();
    let remainder = match case.mode() {
        BoundMode::Linear => None,
        BoundMode::Nonlinear => {
            let (order, constant) = remainder_at(case, setup, &witness, cfg)?;
            lipschitz = lipschitz.max(constant);
            Some(order)
        }
    };
    let law = CoverLaw {
        c_k: cover_constant(case, c_k, d, dd, setup.fixed.len()),
        exponent: case.cover_exponent(d) as f64,
    };
    let input = BoundInput {
        d_alpha: setup.basis.len(),
        r,
        sigma: sigma.value,
        lipschitz,
        epsilon: 1.0,
        a: setup.a0,
    };
    let bound = (sigma.value > 0.0 && lipschitz > 0.0)
        .then(|| assemble_bound(law, &input, case.mode()))
        .transpose()?;
    Ok(CaseBound {
        case,
        set_size: set.len(),
        cover_size: cover.len(),
        sigma_delta: sigma.value,
        sigma_witness: witness,
        lipschitz,
        remainder,
        bound,
    })
}

/// Accepted band around the quadratic remainder order.
pub const REMAINDER_SLOPE_BAND: (f64, f64) = (1.85, 2.15);

pub fn bounds(cfg: &ExperimentConfig) -> Result<CommandReport> {
    let setup = Setup::prepare(cfg)?;
    let d = setup.system.dim();
    let dd = cfg.embedding_dim;
    let dim = box_dimension(&setup.cloud, &cfg.scale_ladder)?;
    let cases = BoundCase::ALL
        .iter()
        .filter(|c| c.rank(dd) > 0)
        .map(|&c| evaluate_case(c, &setup, cfg, dim.c_k))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&[
        "case", "mode", "cover_exponent", "rank", "margin", "threshold_dim", "cover_constant", "sigma_delta",
        "lipschitz", "log_constant", "crossover", "bound_at_one", "remainder_slope",
    ]);
    let mut checks = Vec::new();
    for cb in &cases {
        let c = cb.case;
        let margin = c.margin(d, dd);
        table.push(vec![
            c.name().into(),
            format!("{:?}", c.mode()).to_lowercase(),
            c.cover_exponent(d).to_string(),
            c.rank(dd).to_string(),
            fmt_f64(margin),
            c.threshold_dim(d).to_string(),
            cb.bound.map_or("none".into(), |b| fmt_f64(b.law.c_k)),
            fmt_f64(cb.sigma_delta),
            fmt_f64(cb.lipschitz),
            cb.bound.map_or("none".into(), |b| fmt_f64(b.log_constant)),
            cb.crossover().map_or("none".into(), fmt_f64),
            cb.bound.map_or("none".into(), |b| fmt_f64(b.at(1.0))),
            match &cb.remainder {
                Some(RemainderOrder::Slope { slope, .. }) => fmt_f64(*slope),
                Some(RemainderOrder::ExactlyLinear { .. }) => "exactly_linear".into(),
                None => "none".into(),
            },
        ]);
        checks.push(Check::new(
            format!("{}_margin_sign", c.name()),
            (margin > 0.0) == (dd >= c.threshold_dim(d)),
            format!("margin {margin} at D = {dd}, threshold {}", c.threshold_dim(d)),
        ));
        checks.push(Check::new(
            format!("{}_sigma_delta", c.name()),
            cb.bound.is_some(),
            format!("sigma_delta = {:e} over {} cover centers", cb.sigma_delta, cb.cover_size),
        ));
        if let Some(b) = cb.bound {
            let clamped = b.at(1.0) <= 1.0 && cfg.scale_ladder.iter().all(|&e| (0.0..=1.0).contains(&b.at(e)));
            checks.push(Check::new(
                format!("{}_clamped", c.name()),
                clamped,
                format!("bound at eps = 1 is {}", b.at(1.0)),
            ));
        }
        if let Some(order) = &cb.remainder {
            let ok = order.is_exactly_linear()
                || order
                    .slope()
                    .is_some_and(|s| (REMAINDER_SLOPE_BAND.0..=REMAINDER_SLOPE_BAND.1).contains(&s));
            checks.push(Check::new(
                format!("{}_remainder_order", c.name()),
                ok,
                format!("{order:?}"),
            ));
        }
    }
    let curves: Vec<_> = cases
        .iter()
        .filter_map(|cb| cb.bound.map(|b| (cb.case, b)))
        .map(|(c, b)| {
            json!({
                "case": c.name(),
                "log_bound": (0..=12).map(|k| json!({"epsilon": 10f64.powi(-k), "log_value": b.log_at(10f64.powi(-k))})).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(CommandReport {
        command: "bounds".into(),
        table,
        aggregates: json!({
            "state_dim": d,
            "embedding_dim": dd,
            "basis_size": setup.basis.len(),
            "a0": setup.a0,
            "box_dimension": dim,
            "cases": cases,
            "curves": curves,
        }),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            embedding_dim: 4,
            cloud_size: 400,
            escape_orbits: 100,
            escape_draws: 4,
            bound_samples: 40,
            ..Default::default()
        }
    }

    #[test]
    fn every_case_has_a_quadratic_remainder() {
        let cfg = cfg();
        let setup = Setup::prepare(&cfg).unwrap();
        for case in BoundCase::ALL {
            let cb = evaluate_case(case, &setup, &cfg, 10.0).unwrap();
            assert!(cb.sigma_delta > 0.0, "{}", case.name());
            if let Some(order) = cb.remainder {
                let s = order.slope().unwrap();
                assert!((s - 2.0).abs() < 0.15, "{}: slope {s}", case.name());
            }
        }
    }

    #[test]
    fn report_margins_follow_thresholds() {
        let r = bounds(&cfg()).unwrap();
        let margins = r.table.column("margin").unwrap();
        assert_eq!(margins.len(), 5);
        // d = 2, D = 4 lies at or below every threshold.
        let positive: Vec<bool> = margins.iter().map(|m| m.parse::<f64>().unwrap() > 0.0).collect();
        assert_eq!(positive, vec![false, false, false, false, false]);
        assert!(r.checks.iter().filter(|c| c.name.ends_with("margin_sign")).all(|c| c.passed));
    }
}
