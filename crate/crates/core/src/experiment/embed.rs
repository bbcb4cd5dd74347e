use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{fmt_f64, Check, CommandReport, Table};
use super::setup::Setup;
use crate::delay::{delay_jacobian, delay_map, jacobian_along, observe};
use crate::dynsys::{iterate, refine_fixed_point, Ball, BuiltinSystem, DynamicalMap, PerturbedSystem};
use crate::error::Result;
use crate::prevalence::{wilson_interval, BoundCase};
use crate::sampling::{stream_rng, uniform_ball};
use crate::structmat::singular_values;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Separated pair satisfying every admissibility predicate.
    Separated,
    /// `(x, phi^{k-1}(x))` for `k = 2..=D`.
    OrbitShift,
    /// A perturbed fixed point against a point at least `3 delta` from it.
    FixedPoint,
}

impl PairKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Separated => "separated",
            Self::OrbitShift => "orbit_shift",
            Self::FixedPoint => "fixed_point",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairWitness {
    pub kind: PairKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DrawResult {
    pub draw: usize,
    pub control: bool,
    #[serde(skip)]
    pub coeffs: DVector<f64>,
    pub c_norm: f64,
    pub min_g: f64,
    pub min_g_witness: Option<PairWitness>,
    pub min_sigma: f64,
    pub sigma_witness: Option<Vec<f64>>,
    pub injective: bool,
    pub immersive: bool,
    pub separated_pairs: usize,
    pub orbit_shift_pairs: usize,
    pub fixed_point_pairs: usize,
    pub points_checked: usize,
    pub escapes: usize,
    pub audit_violations: usize,
    pub fixed_point_shift: f64,
}

impl DrawResult {
    pub fn audited_pairs(&self) -> usize {
        self.separated_pairs + self.orbit_shift_pairs + self.fixed_point_pairs
    }
}

impl Setup {
    pub fn perturbed(&self, coeffs: &DVector<f64>) -> Result<PerturbedSystem<BuiltinSystem>> {
        PerturbedSystem::new(self.system, self.basis.clone(), coeffs.clone(), self.a0.max(coeffs.norm()))
    }

    /// `|G(x, y)|` under the map perturbed by `coeffs`.
    pub fn pair_gap(&self, coeffs: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let pert = self.perturbed(coeffs)?;
        Ok((delay_map(&pert, x, &self.delay)? - delay_map(&pert, y, &self.delay)?).norm())
    }

    /// Smallest singular value of the delay Jacobian at `x`.
    pub fn immersion_sigma(&self, coeffs: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
        let pert = self.perturbed(coeffs)?;
        let j = delay_jacobian(&pert, x, &self.delay)?;
        Ok(smallest_column_sigma(&j))
    }
}

fn smallest_column_sigma(j: &nalgebra::DMatrix<f64>) -> f64 {
    let d = j.ncols();
    let sv = singular_values(j).expect("finite delay Jacobian");
    sv.get(d - 1).copied().unwrap_or(0.0)
}

/// The `4` admissibility predicates for a separated pair, checked on the
/// perturbed orbits of both points.
fn separated_admissible(
    ox: &[DVector<f64>],
    oy: &[DVector<f64>],
    fixed: &[DVector<f64>],
    k: &Ball,
    delta: f64,
    dd: usize,
) -> bool {
    let (x, y) = (&ox[0], &oy[0]);
    k.contains(x)
        && k.contains(y)
        && (x - y).norm() >= delta
        && fixed
            .iter()
            .all(|xi| (x - xi).norm() >= 3.0 * delta && (y - xi).norm() >= 3.0 * delta)
        && (1..dd).all(|j| (x - &oy[j]).norm() >= 2.0 * delta && (y - &ox[j]).norm() >= 2.0 * delta)
}

fn run_draw(setup: &Setup, cfg: &ExperimentConfig, draw: usize, control: bool) -> Result<DrawResult> {
    let dd = cfg.embedding_dim;
    let delta = cfg.delta;
    let mut rng = stream_rng(cfg.master_seed, draw as u64);
    let coeffs = if control {
        DVector::zeros(setup.basis.len())
    } else {
        uniform_ball(&mut rng, &Ball::centered(setup.basis.len(), setup.a0))
    };
    let pert = setup.perturbed(&coeffs)?;

    let mut fixed = Vec::with_capacity(setup.fixed.len());
    let mut fixed_point_shift: f64 = 0.0;
    for z in &setup.fixed.points {
        let xi = refine_fixed_point(&pert, z, 1e-13)?;
        fixed_point_shift = fixed_point_shift.max((&xi - z).norm());
        fixed.push(xi);
    }

    let n = setup.cloud.len();
    let mut escapes = 0;
    let orbits: Vec<Option<Vec<DVector<f64>>>> = setup
        .cloud
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let len = if i < cfg.n_planted { 2 * dd - 1 } else { dd };
            iterate(&pert, x, len.max(1), Some(&setup.kplus)).ok()
        })
        .collect();
    escapes += orbits.iter().filter(|o| o.is_none()).count();
    let delays: Vec<Option<DVector<f64>>> = orbits.iter().map(|o| o.as_ref().map(|o| observe(&o[..dd]))).collect();
    let admissible: Vec<bool> = (0..n)
        .map(|i| {
            orbits[i].is_some() && fixed.iter().all(|xi| (&setup.cloud[i] - xi).norm() >= 3.0 * delta)
        })
        .collect();

    let mut min_g = f64::INFINITY;
    let mut witness: Option<PairWitness> = None;
    let mut consider = |g: f64, kind: PairKind, x: &DVector<f64>, y: &DVector<f64>| {
        if g < min_g {
            min_g = g;
            witness = Some(PairWitness {
                kind,
                x: x.as_slice().to_vec(),
                y: y.as_slice().to_vec(),
            });
        }
    };

    let mut accepted: Vec<(usize, usize)> = Vec::with_capacity(cfg.n_pairs);
    let max_attempts = cfg.n_pairs.saturating_mul(50);
    let mut attempts = 0;
    while accepted.len() < cfg.n_pairs && attempts < max_attempts && n >= 2 {
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j || !admissible[i] || !admissible[j] {
            continue;
        }
        let (ox, oy) = (orbits[i].as_ref().unwrap(), orbits[j].as_ref().unwrap());
        if !separated_admissible(ox, oy, &fixed, &setup.k, delta, dd) {
            continue;
        }
        let g = (delays[i].as_ref().unwrap() - delays[j].as_ref().unwrap()).norm();
        consider(g, PairKind::Separated, &setup.cloud[i], &setup.cloud[j]);
        accepted.push((i, j));
    }

    let mut orbit_shift_pairs = 0;
    for i in 0..cfg.n_planted.min(n) {
        if !admissible[i] {
            continue;
        }
        let o = orbits[i].as_ref().unwrap();
        for k in 1..dd {
            let fy = observe(&o[k..k + dd]);
            let g = (delays[i].as_ref().unwrap() - fy).norm();
            consider(g, PairKind::OrbitShift, &setup.cloud[i], &o[k]);
            orbit_shift_pairs += 1;
        }
    }

    let mut fixed_point_pairs = 0;
    for xi in &fixed {
        let Ok(fxi) = delay_map(&pert, xi, &setup.delay) else {
            continue;
        };
        for i in 0..n {
            if admissible[i] {
                let g = (&fxi - delays[i].as_ref().unwrap()).norm();
                consider(g, PairKind::FixedPoint, xi, &setup.cloud[i]);
                fixed_point_pairs += 1;
            }
        }
    }

    // Independent audit: fresh orbits for every accepted pair.
    let audit_violations = accepted
        .iter()
        .filter(|&&(i, j)| {
            let ox = iterate(&pert, &setup.cloud[i], dd, Some(&setup.kplus));
            let oy = iterate(&pert, &setup.cloud[j], dd, Some(&setup.kplus));
            match (ox, oy) {
                (Ok(ox), Ok(oy)) => !separated_admissible(&ox, &oy, &fixed, &setup.k, delta, dd),
                _ => true,
            }
        })
        .count();

    let mut min_sigma = f64::INFINITY;
    let mut sigma_witness = None;
    let mut points_checked = 0;
    for i in 0..n {
        if points_checked == cfg.n_points {
            break;
        }
        if !admissible[i] {
            continue;
        }
        let j = jacobian_along(&pert, &orbits[i].as_ref().unwrap()[..dd]);
        let s = smallest_column_sigma(&j);
        points_checked += 1;
        if s < min_sigma {
            min_sigma = s;
            sigma_witness = Some(setup.cloud[i].as_slice().to_vec());
        }
    }

    Ok(DrawResult {
        draw,
        control,
        c_norm: coeffs.norm(),
        coeffs,
        injective: min_g > cfg.injectivity_floor,
        immersive: min_sigma > cfg.immersion_floor,
        min_g,
        min_g_witness: witness,
        min_sigma,
        sigma_witness,
        separated_pairs: accepted.len(),
        orbit_shift_pairs,
        fixed_point_pairs,
        points_checked,
        escapes,
        audit_violations,
        fixed_point_shift,
    })
}

#[derive(Clone, Debug)]
pub struct EmbedOutcome {
    pub setup: Setup,
    /// Control draw first (when enabled), then draws `1..=n_draws`.
    pub draws: Vec<DrawResult>,
}

impl EmbedOutcome {
    pub fn random_draws(&self) -> impl Iterator<Item = &DrawResult> {
        self.draws.iter().filter(|d| !d.control)
    }

    pub fn control(&self) -> Option<&DrawResult> {
        self.draws.iter().find(|d| d.control)
    }

    pub fn injective_count(&self) -> usize {
        self.random_draws().filter(|d| d.injective).count()
    }

    pub fn immersive_count(&self) -> usize {
        self.random_draws().filter(|d| d.immersive).count()
    }
}

/// Runs every coefficient draw on the current rayon pool. Draw `i` uses
/// stream `i` of the master seed, so the outcome does not depend on the
/// number of threads.
pub fn embed_verify(cfg: &ExperimentConfig) -> Result<EmbedOutcome> {
    let setup = Setup::prepare(cfg)?;
    let mut jobs: Vec<(usize, bool)> = Vec::with_capacity(cfg.n_draws + 1);
    if cfg.zero_control {
        jobs.push((0, true));
    }
    jobs.extend((1..=cfg.n_draws).map(|i| (i, false)));
    let draws = jobs
        .par_iter()
        .map(|&(i, control)| run_draw(&setup, cfg, i, control))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbedOutcome { setup, draws })
}

fn required_passes(cfg: &ExperimentConfig) -> usize {
    (cfg.min_pass_fraction * cfg.n_draws as f64 - 1e-9).ceil() as usize
}

pub fn embed_report(cfg: &ExperimentConfig, out: &EmbedOutcome) -> CommandReport {
    let mut table = Table::new(&[
        "draw", "seed", "control", "c_norm", "min_g", "min_g_kind", "min_sigma", "injective", "immersive",
        "audited_pairs", "points", "escapes", "audit_violations",
    ]);
    for d in &out.draws {
        table.push(vec![
            d.draw.to_string(),
            cfg.master_seed.to_string(),
            d.control.to_string(),
            fmt_f64(d.c_norm),
            fmt_f64(d.min_g),
            d.min_g_witness.as_ref().map_or("none", |w| w.kind.as_str()).to_string(),
            fmt_f64(d.min_sigma),
            d.injective.to_string(),
            d.immersive.to_string(),
            d.audited_pairs().to_string(),
            d.points_checked.to_string(),
            d.escapes.to_string(),
            d.audit_violations.to_string(),
        ]);
    }

    let n = cfg.n_draws;
    let need = required_passes(cfg);
    let inj = out.injective_count();
    let imm = out.immersive_count();
    let mut checks = vec![
        Check::new("injectivity_proxy", inj >= need, format!("{inj}/{n} draws passed, need {need}")),
        Check::new("immersivity_proxy", imm >= need, format!("{imm}/{n} draws passed, need {need}")),
    ];
    let short = out.random_draws().filter(|d| d.audited_pairs() < cfg.n_pairs).count();
    checks.push(Check::new(
        "audited_pairs",
        short == 0,
        format!("{short} draws audited fewer than {} pairs", cfg.n_pairs),
    ));
    let violations: usize = out.draws.iter().map(|d| d.audit_violations).sum();
    checks.push(Check::new("pair_predicates", violations == 0, format!("{violations} audit violations")));
    if cfg.expect_control_immersion_failure {
        let ok = out.control().is_some_and(|c| !c.immersive);
        checks.push(Check::new(
            "zero_control_fails_immersivity",
            ok,
            match out.control() {
                Some(c) => format!("control min sigma = {:e}", c.min_sigma),
                None => "no control draw was run".into(),
            },
        ));
    }
    if let Some(a1) = cfg.a1 {
        let worst = out
            .draws
            .iter()
            .filter(|d| d.c_norm <= a1)
            .map(|d| d.fixed_point_shift)
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "a1_fixed_point_shift",
            worst < cfg.delta,
            format!("largest fixed-point shift {worst:e} for |c| <= {a1:e}"),
        ));
    }

    let global_g = out
        .random_draws()
        .min_by(|a, b| a.min_g.total_cmp(&b.min_g));
    let global_s = out
        .random_draws()
        .min_by(|a, b| a.min_sigma.total_cmp(&b.min_sigma));
    let aggregates = json!({
        "system": out.setup.system.to_string(),
        "embedding_dim": cfg.embedding_dim,
        "basis_size": out.setup.basis.len(),
        "a0": out.setup.a0,
        "a0_trials": out.setup.a0_trials,
        "fixed_points": out.setup.fixed.points.iter().map(|p| p.as_slice().to_vec()).collect::<Vec<_>>(),
        "fixed_point_separation": out.setup.fixed.min_separation,
        "draws": n,
        "injective_passes": inj,
        "immersive_passes": imm,
        "injective_wilson95": wilson_interval(inj, n, 1.96),
        "immersive_wilson95": wilson_interval(imm, n, 1.96),
        "escapes": out.draws.iter().map(|d| d.escapes).sum::<usize>(),
        "min_g": global_g.map(|d| json!({"draw": d.draw, "value": d.min_g, "witness": d.min_g_witness})),
        "min_sigma": global_s.map(|d| json!({"draw": d.draw, "value": d.min_sigma, "witness": d.sigma_witness})),
        "control": out.control().map(|c| json!({"min_g": c.min_g, "min_sigma": c.min_sigma, "immersive": c.immersive, "injective": c.injective})),
    });
    CommandReport {
        command: "embed-verify".into(),
        table,
        aggregates,
        checks,
    }
}

/// One embedding experiment per `D`, side by side with the `eps` exponent
/// margins of the assembled bounds.
pub fn sweep(cfg: &ExperimentConfig, d_list: &[usize]) -> Result<CommandReport> {
    cfg.validate()?;
    let d = cfg.builtin_system()?.dim();
    let list: Vec<usize> = if d_list.is_empty() {
        (2 * d + 1..=4 * d + 2).collect()
    } else {
        d_list.to_vec()
    };
    let mut header = vec!["embedding_dim", "draws", "injective_failures", "immersive_failures", "escapes", "a0"];
    let names: Vec<String> = BoundCase::ALL.iter().map(|c| format!("margin_{}", c.name())).collect();
    header.extend(names.iter().map(|s| s.as_str()));
    let mut table = Table::new(&header);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &dd in &list {
        let sub = ExperimentConfig {
            embedding_dim: dd,
            ..cfg.clone()
        };
        let out = embed_verify(&sub)?;
        let inj_fail = cfg.n_draws - out.injective_count();
        let imm_fail = cfg.n_draws - out.immersive_count();
        let escapes: usize = out.draws.iter().map(|x| x.escapes).sum();
        let mut row = vec![
            dd.to_string(),
            cfg.n_draws.to_string(),
            inj_fail.to_string(),
            imm_fail.to_string(),
            escapes.to_string(),
            fmt_f64(out.setup.a0),
        ];
        row.extend(BoundCase::ALL.iter().map(|c| fmt_f64(c.margin(d, dd))));
        table.push(row);
        let need = required_passes(cfg);
        checks.push(Check::new(
            format!("embedding_dim_{dd}"),
            out.injective_count() >= need && out.immersive_count() >= need,
            format!("{inj_fail} injectivity and {imm_fail} immersivity failures in {} draws", cfg.n_draws),
        ));
        rows.push(json!({
            "embedding_dim": dd,
            "injective_wilson95": wilson_interval(out.injective_count(), cfg.n_draws, 1.96),
            "immersive_wilson95": wilson_interval(out.immersive_count(), cfg.n_draws, 1.96),
            "separated_pairs_margin_positive": BoundCase::SeparatedPairs.margin(d, dd) > 0.0,
        }));
    }
    Ok(CommandReport {
        command: "sweep".into(),
        table,
        aggregates: json!({
            "state_dim": d,
            "embedding_dims": list,
            "separated_pairs_threshold": BoundCase::SeparatedPairs.threshold_dim(d),
            "rows": rows,
        }),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(system: &str) -> ExperimentConfig {
        ExperimentConfig {
            system: system.into(),
            embedding_dim: 5,
            cloud_size: 200,
            n_points: 100,
            n_pairs: 500,
            n_planted: 20,
            n_draws: 4,
            escape_orbits: 100,
            escape_draws: 4,
            ..Default::default()
        }
    }

    #[test]
    fn linear_control_fails_immersivity_and_draws_repair_it() {
        let cfg = ExperimentConfig {
            k_radius: 1.0,
            uniform_k: true,
            a0: Some(1e-3),
            expect_control_immersion_failure: true,
            ..small("linear_diag(0.5, 0.3333333333333333)")
        };
        let out = embed_verify(&cfg).unwrap();
        let control = out.control().unwrap();
        assert!(!control.immersive);
        assert_eq!(control.min_sigma, 0.0);
        assert_eq!(out.immersive_count(), 4);
        let report = embed_report(&cfg, &out);
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn witnesses_reproduce() {
        let cfg = small("henon");
        let out = embed_verify(&cfg).unwrap();
        for d in out.random_draws() {
            assert_eq!(d.audit_violations, 0);
            let w = d.min_g_witness.as_ref().unwrap();
            let g = out
                .setup
                .pair_gap(&d.coeffs, &DVector::from_column_slice(&w.x), &DVector::from_column_slice(&w.y))
                .unwrap();
            assert!((g - d.min_g).abs() <= 1e-12);
            let s = out
                .setup
                .immersion_sigma(&d.coeffs, &DVector::from_column_slice(d.sigma_witness.as_ref().unwrap()))
                .unwrap();
            assert!((s - d.min_sigma).abs() <= 1e-12);
        }
    }
}
