use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{fmt_f64, Check, CommandReport, Table};
use super::setup::{sample_attractor, STREAM_RANK};
use crate::delay::{DelayConfig, SensitivityState};
use crate::dynsys::{iterate, Ball, BuiltinSystem};
use crate::error::Result;
use crate::polybasis::PolyBasis;
use crate::sampling::{separated_cube_points, stream_rng, unit_sphere};
use crate::structmat::{
    circulant, difference, hermite_full, hermite_incomplete, numerical_rank, two_spike_row, vandermonde,
    DEFAULT_REL_TOLERANCE,
};

/// Minimum pairwise distance between sampled nodes and between the
/// orbit points entering a sensitivity matrix.
pub const NODE_SEPARATION: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub label: String,
    pub expected_rank: usize,
    pub numerical_rank: usize,
    /// `sigma_expected / sigma_1`, how far the certificate is from the cutoff.
    pub relative_sigma: f64,
}

impl Trial {
    pub fn passed(&self) -> bool {
        self.numerical_rank == self.expected_rank
    }

    fn from_matrix(label: String, m: &DMatrix<f64>, expected: usize, tol: f64) -> Result<Self> {
        let cert = numerical_rank(m, tol)?;
        let s1 = cert.sigma(1);
        Ok(Self {
            label,
            expected_rank: expected,
            numerical_rank: cert.numerical_rank,
            relative_sigma: if s1 > 0.0 { cert.sigma(expected) / s1 } else { 0.0 },
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    /// Exhaustive suites must pass every case.
    pub exhaustive: bool,
    pub trials: Vec<Trial>,
}

impl SuiteResult {
    pub fn passes(&self) -> usize {
        self.trials.iter().filter(|t| t.passed()).count()
    }

    pub fn pass_fraction(&self) -> f64 {
        self.passes() as f64 / self.trials.len().max(1) as f64
    }

    pub fn passed(&self, min_fraction: f64) -> bool {
        if self.exhaustive {
            self.passes() == self.trials.len()
        } else {
            !self.trials.is_empty() && self.pass_fraction() >= min_fraction
        }
    }
}

/// The six-by-eight circulant whose rank falls short of its row count.
pub fn counterexample_suite() -> Result<SuiteResult> {
    let m = circulant(&[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0], 6)?;
    Ok(SuiteResult {
        name: "counterexample_6x8",
        exhaustive: true,
        trials: vec![Trial::from_matrix("first row 1,0,0,0,-1,0,0,0".into(), &m.entries, 4, DEFAULT_REL_TOLERANCE)?],
    })
}

/// Every two-spike circulant with `D' <= max_width` and `m <= ceil(D'/2)` rows.
pub fn two_spike_suite(max_width: usize) -> Result<SuiteResult> {
    let mut trials = Vec::new();
    for width in 2..=max_width {
        for j1 in 0..=width - 2 {
            let j2 = width - 2 - j1;
            let row = two_spike_row(j1, j2);
            for m in 1..=width.div_ceil(2) {
                let c = circulant(&row, m)?;
                trials.push(Trial::from_matrix(
                    format!("D'={width} j1={j1} j2={j2} m={m}"),
                    &c.entries,
                    m,
                    DEFAULT_REL_TOLERANCE,
                )?);
            }
        }
    }
    Ok(SuiteResult {
        name: "two_spike_circulant",
        exhaustive: true,
        trials,
    })
}

fn random_suite<F>(name: &'static str, index: u64, cfg: &ExperimentConfig, trial: F) -> Result<SuiteResult>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Trial> + Sync,
{
    let trials = (0..cfg.rank_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.master_seed, STREAM_RANK + (index << 24) + i as u64);
            trial(i, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult {
        name,
        exhaustive: false,
        trials,
    })
}

/// Cycles through every `(d, D')` combination as the trial index grows.
fn grid(i: usize, dims: &[usize], widths: &[usize]) -> (usize, usize) {
    (dims[i % dims.len()], widths[(i / dims.len()) % widths.len()])
}

pub fn vandermonde_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    random_suite("vandermonde", 0, cfg, |i, rng| {
        let (d, w) = grid(i, &[1, 2, 3], &[2, 3, 4, 5]);
        let pts = separated_cube_points(rng, d, w, NODE_SEPARATION);
        let basis = PolyBasis::enumerate(d, (w - 1) as u32)?;
        let m = vandermonde(&basis, &pts)?;
        Trial::from_matrix(format!("d={d} D'={w} D+={}", w - 1), &m.entries, w, cfg.rank_tolerance)
    })
}

pub fn hermite_incomplete_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    random_suite("hermite_incomplete", 1, cfg, |i, rng| {
        let (d, w) = grid(i, &[1, 2], &[2, 3]);
        let pts = separated_cube_points(rng, d, w, NODE_SEPARATION);
        let basis = PolyBasis::enumerate(d, w as u32)?;
        let m = hermite_incomplete(&basis, &pts)?;
        Trial::from_matrix(format!("d={d} D'={w} D+={w}"), &m.entries, w * d, cfg.rank_tolerance)
    })
}

pub fn hermite_full_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    random_suite("hermite_full", 2, cfg, |i, rng| {
        let (d, w) = grid(i, &[1, 2], &[2, 3]);
        let pts = separated_cube_points(rng, d, w, NODE_SEPARATION);
        let basis = PolyBasis::enumerate(d, (2 * w - 1) as u32)?;
        let m = hermite_full(&basis, &pts)?;
        Trial::from_matrix(format!("d={d} D'={w} D+={}", 2 * w - 1), &m.entries, w * (1 + d), cfg.rank_tolerance)
    })
}

/// `[I, -I]` times a full-row-rank Vandermonde matrix on `2D` nodes keeps rank `D`.
pub fn product_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    random_suite("product_rank", 3, cfg, |i, rng| {
        let (d, w) = grid(i, &[1, 2], &[2, 3, 4]);
        let pts = separated_cube_points(rng, d, 2 * w, NODE_SEPARATION);
        let basis = PolyBasis::enumerate(d, (2 * w - 1) as u32)?;
        let prod = difference(w).product(&vandermonde(&basis, &pts)?)?;
        Trial::from_matrix(format!("d={d} D={w}"), &prod.entries, w, cfg.rank_tolerance)
    })
}

fn well_separated(points: &[DVector<f64>]) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, p)| points[i + 1..].iter().all(|q| (p - q).norm() >= NODE_SEPARATION))
}

const MAX_REJECTIONS: usize = 10_000;

/// Draws cloud points until the first `n` iterates of each are pairwise
/// separated, jointly across all requested points.
fn separated_orbits(
    rng: &mut ChaCha8Rng,
    cloud: &[DVector<f64>],
    map: &BuiltinSystem,
    counts: &[usize],
) -> Result<Vec<DVector<f64>>> {
    for _ in 0..MAX_REJECTIONS {
        let starts: Vec<DVector<f64>> = counts.iter().map(|_| cloud[rng.random_range(0..cloud.len())].clone()).collect();
        let mut relevant = Vec::new();
        for (x, &n) in starts.iter().zip(counts) {
            if n > 0 {
                relevant.extend(iterate(map, x, n, None)?);
            }
        }
        if well_separated(&relevant) {
            return Ok(starts);
        }
    }
    Err(crate::error::Error::Hypothesis("could not sample separated orbit points".into()))
}

fn attractor_cloud(cfg: &ExperimentConfig) -> Result<Vec<DVector<f64>>> {
    let henon = BuiltinSystem::henon();
    sample_attractor(&henon, &DVector::zeros(2), cfg.burn_in, cfg.stride, 500, &Ball::centered(2, 2.0))
}

/// Sensitivity suites on the Henon attractor with `D` cycling through `2..=5`.
pub fn sensitivity_suites(cfg: &ExperimentConfig) -> Result<Vec<SuiteResult>> {
    let cloud = attractor_cloud(cfg)?;
    let map = BuiltinSystem::henon();
    let widths = [2usize, 3, 4, 5];
    let setup = |dd: usize| -> Result<(PolyBasis, DelayConfig)> {
        let delay = DelayConfig::new(dd)?;
        Ok((delay.default_basis(2)?, delay))
    };

    let v = random_suite("sensitivity_v", 4, cfg, |i, rng| {
        let dd = widths[i % widths.len()];
        let (basis, delay) = setup(dd)?;
        let x = separated_orbits(rng, &cloud, &map, &[dd - 1])?.remove(0);
        let state = SensitivityState::compute(&map, &basis, &x, None, &delay, dd)?;
        Trial::from_matrix(format!("D={dd}"), &state.v_matrix().entries, dd - 1, cfg.rank_tolerance)
    })?;

    let stacked = random_suite("stacked_v", 5, cfg, |i, rng| {
        let dd = widths[i % widths.len()];
        let (basis, delay) = setup(dd)?;
        let xy = separated_orbits(rng, &cloud, &map, &[dd - 1, dd - 1])?;
        let vx = SensitivityState::compute(&map, &basis, &xy[0], None, &delay, dd)?.v_matrix().entries;
        let vy = SensitivityState::compute(&map, &basis, &xy[1], None, &delay, dd)?.v_matrix().entries;
        let mut m = DMatrix::zeros(2 * (dd - 1), basis.len());
        m.rows_mut(0, dd - 1).copy_from(&vx);
        m.rows_mut(dd - 1, dd - 1).copy_from(&vy);
        Trial::from_matrix(format!("D={dd}"), &m, 2 * (dd - 1), cfg.rank_tolerance)
    })?;

    let extended = random_suite("extended_v", 6, cfg, |i, rng| {
        let dd = widths[i % widths.len()];
        let k = 2 + (i / widths.len()) % (dd - 1);
        let dplus = dd + k - 2;
        let (basis, delay) = setup(dd)?;
        let x = separated_orbits(rng, &cloud, &map, &[dplus - 1])?.remove(0);
        let state = SensitivityState::compute(&map, &basis, &x, None, &delay, dplus)?;
        Trial::from_matrix(format!("D={dd} k={k} D+={dplus}"), &state.v_matrix().entries, dplus - 1, cfg.rank_tolerance)
    })?;

    let h = random_suite("sensitivity_h", 7, cfg, |i, rng| {
        let dd = widths[i % widths.len()];
        let (basis, delay) = setup(dd)?;
        let x = separated_orbits(rng, &cloud, &map, &[dd - 1])?.remove(0);
        let v = unit_sphere(rng, 2);
        let state = SensitivityState::compute(&map, &basis, &x, Some(&v), &delay, dd)?;
        let hm = state.h_matrix().expect("tangent seed was supplied");
        Trial::from_matrix(format!("D={dd}"), &hm.entries, dd - 1, cfg.rank_tolerance)
    })?;

    Ok(vec![v, stacked, extended, h])
}

pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<SuiteResult>> {
    let mut suites = vec![
        counterexample_suite()?,
        two_spike_suite(12)?,
        vandermonde_suite(cfg)?,
        hermite_incomplete_suite(cfg)?,
        hermite_full_suite(cfg)?,
        product_suite(cfg)?,
    ];
    suites.extend(sensitivity_suites(cfg)?);
    Ok(suites)
}

pub fn rank_suite(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let suites = run_all(cfg)?;
    let mut table = Table::new(&["suite", "trial", "case", "expected_rank", "numerical_rank", "relative_sigma", "passed"]);
    let mut checks = Vec::new();
    let mut summary = Vec::new();
    for s in &suites {
        for (i, t) in s.trials.iter().enumerate() {
            table.push(vec![
                s.name.to_string(),
                i.to_string(),
                t.label.clone(),
                t.expected_rank.to_string(),
                t.numerical_rank.to_string(),
                fmt_f64(t.relative_sigma),
                t.passed().to_string(),
            ]);
        }
        let need = if s.exhaustive { "all cases".to_string() } else { format!("{}", cfg.min_pass_fraction) };
        checks.push(Check::new(
            s.name,
            s.passed(cfg.min_pass_fraction),
            format!("{}/{} passed, need {need}", s.passes(), s.trials.len()),
        ));
        summary.push(json!({
            "suite": s.name,
            "trials": s.trials.len(),
            "passes": s.passes(),
            "exhaustive": s.exhaustive,
            "min_relative_sigma": s.trials.iter().map(|t| t.relative_sigma).fold(f64::INFINITY, f64::min),
        }));
    }
    Ok(CommandReport {
        command: "rank-suite".into(),
        table,
        aggregates: json!({ "suites": summary, "rank_tolerance": cfg.rank_tolerance }),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_has_rank_four() {
        let s = counterexample_suite().unwrap();
        assert_eq!(s.trials[0].numerical_rank, 4);
        assert!(s.passed(1.0));
    }

    #[test]
    fn two_spike_small_widths() {
        let s = two_spike_suite(6).unwrap();
        assert_eq!(s.passes(), s.trials.len());
        // widths 2..=6 contribute (w - 1) * ceil(w / 2) cases each
        assert_eq!(s.trials.len(), 1 + 2 * 2 + 3 * 2 + 4 * 3 + 5 * 3);
    }

    #[test]
    fn randomized_suites_pass_at_small_scale() {
        let cfg = ExperimentConfig { rank_trials: 24, ..Default::default() };
        for s in [vandermonde_suite(&cfg).unwrap(), hermite_full_suite(&cfg).unwrap(), product_suite(&cfg).unwrap()] {
            assert_eq!(s.passes(), 24, "{}", s.name);
        }
        for s in sensitivity_suites(&cfg).unwrap() {
            assert!(s.pass_fraction() >= 0.95, "{}: {:?}", s.name, s.trials.iter().filter(|t| !t.passed()).collect::<Vec<_>>());
        }
    }
}
