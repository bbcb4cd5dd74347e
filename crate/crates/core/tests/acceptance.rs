//! Runs every acceptance criterion, printing one PASS/FAIL line each, and
//! exits non-zero if any criterion fails. Tolerances and time budgets are
//! pinned below.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use delaymap::delay::{taylor_remainder_order, tangent_remainder_order, DelayConfig};
use delaymap::dynsys::{find_fixed_points, tracking_remainder_order, Ball, BuiltinSystem, FixedPointOptions};
use delaymap::experiment::rank_suite::{
    counterexample_suite, hermite_full_suite, hermite_incomplete_suite, product_suite, sensitivity_suites,
    two_spike_suite, vandermonde_suite,
};
use delaymap::experiment::{embed_report, embed_verify, ExperimentConfig};
use delaymap::fit::RemainderOrder;
use delaymap::polybasis::PolyBasis;
use delaymap::prevalence::{
    assemble_bound, bound_linear, bound_nonlinear, box_dimension, BoundCase, BoundInput, CoverLaw,
};
use delaymap::sampling::{stream_rng, uniform_ball, unit_sphere};
use delaymap::structmat::singular_values;

const RANK_PASS_FRACTION: f64 = 0.99;
const SLOPE_TARGET: f64 = 2.0;
const SLOPE_TOLERANCE: f64 = 0.15;
const T_LADDER: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
const SQUARE_DIM_TOLERANCE: f64 = 0.2;
const SEGMENT_DIM_TOLERANCE: f64 = 0.1;
const MC_MATRICES: usize = 50;
const MC_SAMPLES: usize = 100_000;
const MC_EPS_FACTORS: [f64; 6] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = counterexample_suite().expect("counterexample");
    let elapsed = start.elapsed();
    let rank = s.trials[0].numerical_rank;
    outcome(
        rank == 4 && within_budget(elapsed, Duration::from_millis(1)),
        format!("6x8 circulant rank {rank} (expected 4) in {elapsed:?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = two_spike_suite(12).expect("two-spike suite");
    let elapsed = start.elapsed();
    let failures = s.trials.len() - s.passes();
    outcome(
        failures == 0 && within_budget(elapsed, Duration::from_secs(5)),
        format!("{} circulants with D' <= 12, {failures} failures in {elapsed:?}", s.trials.len()),
    )
}

fn criterion_3() -> Outcome {
    let cfg = ExperimentConfig { rank_trials: 200, rank_tolerance: 1e-8, ..Default::default() };
    let start = Instant::now();
    let mut suites = vec![
        vandermonde_suite(&cfg).expect("vandermonde"),
        hermite_incomplete_suite(&cfg).expect("incomplete hermite"),
        hermite_full_suite(&cfg).expect("full hermite"),
        product_suite(&cfg).expect("product"),
    ];
    suites.extend(sensitivity_suites(&cfg).expect("sensitivity suites"));
    let elapsed = start.elapsed();
    let ok = suites.iter().all(|s| s.trials.len() == 200 && s.pass_fraction() >= RANK_PASS_FRACTION);
    let rates: Vec<String> = suites.iter().map(|s| format!("{} {}/{}", s.name, s.passes(), s.trials.len())).collect();
    outcome(
        ok && within_budget(elapsed, Duration::from_secs(60)),
        format!("{} in {elapsed:?}", rates.join(", ")),
    )
}

fn slope_ok(o: &RemainderOrder) -> bool {
    o.slope().is_some_and(|s| (s - SLOPE_TARGET).abs() <= SLOPE_TOLERANCE)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let dd = 5;
    let delay = DelayConfig::new(dd).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for (system, x1) in [
        (BuiltinSystem::henon(), DVector::from_column_slice(&[0.3, 0.2])),
        (BuiltinSystem::ikeda(), DVector::from_column_slice(&[0.5, -0.4])),
    ] {
        let basis = delay.default_basis(2).unwrap();
        let dir = unit_sphere(&mut stream_rng(4, 0), basis.len());
        let v1 = DVector::from_column_slice(&[0.6, 0.8]);
        let f = taylor_remainder_order(&system, &basis, &x1, &delay, &dir, &T_LADDER).unwrap();
        let df = tangent_remainder_order(&system, &basis, &x1, &v1, &delay, &dir, &T_LADDER).unwrap();
        let fixed = find_fixed_points(&system, &Ball::centered(2, 3.0), &FixedPointOptions::default()).unwrap();
        let z0 = &fixed.points[0];
        let tr = tracking_remainder_order(&system, z0, &basis, &dir, &T_LADDER).unwrap();
        ok &= slope_ok(&f) && slope_ok(&df) && slope_ok(&tr);
        notes.push(format!(
            "{}: F {:.3}, dF {:.3}, tracking {:.3}",
            system.kind(),
            f.slope().unwrap_or(f64::NAN),
            df.slope().unwrap_or(f64::NAN),
            tr.slope().unwrap_or(f64::NAN)
        ));
    }
    // Constants-only perturbation of a linear map: every expansion is exact.
    let linear = BuiltinSystem::LinearDiag { a: 0.5, b: 1.0 / 3.0 };
    let constants = PolyBasis::enumerate(2, 0).unwrap();
    let dir = DVector::from_element(1, 1.0);
    let x1 = DVector::from_column_slice(&[0.4, -0.7]);
    let v1 = DVector::from_column_slice(&[0.0, 1.0]);
    let f = taylor_remainder_order(&linear, &constants, &x1, &delay, &dir, &T_LADDER).unwrap();
    let df = tangent_remainder_order(&linear, &constants, &x1, &v1, &delay, &dir, &T_LADDER).unwrap();
    let tr = tracking_remainder_order(&linear, &DVector::zeros(2), &constants, &dir, &T_LADDER).unwrap();
    let exact = f.is_exactly_linear() && df.is_exactly_linear() && tr.is_exactly_linear();
    notes.push(format!("linear control exactly linear: {exact}"));
    let elapsed = start.elapsed();
    outcome(
        ok && exact && within_budget(elapsed, Duration::from_secs(10)),
        format!("{} in {elapsed:?}", notes.join("; ")),
    )
}

/// Samples of the unit ball in `dim` dimensions, shared across matrices.
fn ball_samples(dim: usize, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = stream_rng(seed, 0);
    let ball = Ball::centered(dim, 1.0);
    (0..n).map(|_| uniform_ball(&mut rng, &ball)).collect()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (rows, cols, r) = (4usize, 10usize, 4usize);
    let unit = ball_samples(cols, MC_SAMPLES, 55);
    let mut violations = 0usize;
    let mut checks = 0usize;
    let mut nonzero = 0usize;
    for m in 0..MC_MATRICES {
        let mut rng = stream_rng(5, 1 + m as u64);
        let a = DMatrix::from_fn(rows, cols, |_, _| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng));
        let sigma = singular_values(&a).unwrap()[r - 1];
        let c0 = uniform_ball(&mut rng, &Ball::centered(cols, 0.5));
        let g0 = -(&a * &c0);
        let images: Vec<DVector<f64>> = unit.iter().map(|c| &a * c + &g0).collect();
        // Linear: c uniform in |c| <= 1, event |A c + g0| <= L eps with L = 1.
        for f in MC_EPS_FACTORS {
            let eps = sigma * f;
            let hits = images.iter().filter(|g| g.norm() <= eps).count();
            let freq = hits as f64 / MC_SAMPLES as f64;
            let bound = bound_linear(&BoundInput { d_alpha: cols, r, sigma, lipschitz: 1.0, epsilon: eps, a: 1.0 })
                .unwrap()
                .probability;
            checks += 1;
            nonzero += usize::from(hits > 0);
            violations += usize::from(freq > bound);
        }
        // Nonlinear: h(c) = L |c|^2 w, c uniform in |c| <= sqrt(eps).
        let w = unit_sphere(&mut rng, rows);
        let l = 1.0;
        for f in MC_EPS_FACTORS {
            let eps = (sigma * f).powi(2);
            let root = eps.sqrt();
            let center = &c0 * root;
            let g0 = -(&a * &center);
            let hits = unit
                .iter()
                .filter(|u| {
                    let c = *u * root;
                    let g = &a * &c + &g0 + &w * (l * c.norm_squared());
                    g.norm() <= l * eps
                })
                .count();
            let freq = hits as f64 / MC_SAMPLES as f64;
            let bound = bound_nonlinear(&BoundInput { d_alpha: cols, r, sigma, lipschitz: l, epsilon: eps, a: root })
                .unwrap()
                .probability;
            checks += 1;
            nonzero += usize::from(hits > 0);
            violations += usize::from(freq > bound);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && nonzero > 0 && within_budget(elapsed, Duration::from_secs(300)),
        format!("{violations} violations over {checks} (matrix, eps) cells, {nonzero} with hits, in {elapsed:?}"),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(6, 0);
    let square: Vec<DVector<f64>> = (0..40_000)
        .map(|_| {
            use rand::Rng;
            DVector::from_column_slice(&[rng.random::<f64>(), rng.random::<f64>()])
        })
        .collect();
    let segment: Vec<DVector<f64>> = (0..2_000)
        .map(|i| DVector::from_column_slice(&[i as f64 / 1999.0, 0.0]))
        .collect();
    let point = vec![DVector::from_column_slice(&[0.3, 0.3]); 50];
    let scales = [0.1, 0.05, 0.025, 0.0125];
    let sq = box_dimension(&square, &scales).unwrap().dimension;
    let seg = box_dimension(&segment, &scales).unwrap().dimension;
    let pt = box_dimension(&point, &scales).unwrap().dimension;
    let elapsed = start.elapsed();
    outcome(
        (sq - 2.0).abs() <= SQUARE_DIM_TOLERANCE
            && (seg - 1.0).abs() <= SEGMENT_DIM_TOLERANCE
            && pt == 0.0
            && within_budget(elapsed, Duration::from_secs(30)),
        format!("square {sq:.3}, segment {seg:.3}, point {pt} in {elapsed:?}"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let henon = ExperimentConfig { embedding_dim: 10, delta: 1e-2, n_draws: 100, ..Default::default() };
    let out = embed_verify(&henon).expect("henon experiment");
    let report = embed_report(&henon, &out);
    let min_pairs = out.random_draws().map(|d| d.audited_pairs()).min().unwrap_or(0);
    let planted = out.random_draws().all(|d| d.orbit_shift_pairs > 0);
    let min_points = out.random_draws().map(|d| d.points_checked).min().unwrap_or(0);
    let (inj, imm) = (out.injective_count(), out.immersive_count());

    let control_cfg = ExperimentConfig {
        system: "linear_diag(0.5, 0.3333333333333333)".into(),
        embedding_dim: 10,
        uniform_k: true,
        a0: Some(1e-3),
        n_draws: 100,
        zero_control: true,
        expect_control_immersion_failure: true,
        ..Default::default()
    };
    let control = embed_verify(&control_cfg).expect("linear control experiment");
    let control_fails = control.control().is_some_and(|c| !c.immersive);
    let linear_imm = control.immersive_count();
    let elapsed = start.elapsed();
    outcome(
        inj >= 99
            && imm >= 99
            && min_pairs >= 20_000
            && planted
            && min_points >= 1000
            && report.checks.iter().all(|c| c.passed)
            && control_fails
            && linear_imm >= 99
            && within_budget(elapsed, Duration::from_secs(600)),
        format!(
            "henon D=10 a0={:e}: injective {inj}/100, immersive {imm}/100, >= {min_pairs} pairs and {min_points} points per draw; \
             linear_diag: c=0 control fails immersivity: {control_fails}, random draws immersive {linear_imm}/100; {elapsed:?}",
            out.setup.a0
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut seen = Vec::new();
    for d in 1..=3usize {
        let expected = [
            (BoundCase::ObservationPairs, 2 * d + 1),
            (BoundCase::ShiftPairs, 2 * d + 1),
            (BoundCase::FixedPointPairs, 2 * d + 2),
            (BoundCase::TangentDirections, 4 * d),
            (BoundCase::SeparatedPairs, 4 * d + 2),
        ];
        for (case, threshold) in expected {
            let margin_at = |dd: usize| {
                let input = BoundInput { d_alpha: 1000, r: case.rank(dd), sigma: 1.0, lipschitz: 1.0, epsilon: 1.0, a: 1.0 };
                let law = CoverLaw { c_k: 1.0, exponent: case.cover_exponent(d) as f64 };
                assemble_bound(law, &input, case.mode()).unwrap().margin
            };
            let first_positive = (2..=40).find(|&dd| margin_at(dd) > 0.0);
            ok &= first_positive == Some(threshold) && (threshold..=40).all(|dd| margin_at(dd) > 0.0);
            seen.push(format!("{}(d={d})={:?}", case.name(), first_positive));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within_budget(elapsed, Duration::from_secs(1)),
        format!("first positive margins {} in {elapsed:?}", seen.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "embedding_dim = 6\ncloud_size = 400\nn_points = 200\nn_pairs = 2000\nn_planted = 40\nn_draws = 12\nescape_orbits = 200\nescape_draws = 8\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_delaymap"))
            .args(["embed-verify", "--seed", "9", "--threads", threads, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .expect("run delaymap");
        if !status.status.success() {
            return outcome(false, format!("embed-verify failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(std::fs::read(out.join("report.csv")).unwrap());
    }
    let elapsed = start.elapsed();
    outcome(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!("report.csv with 1 and 4 threads identical: {} ({} bytes) in {elapsed:?}", outputs[0] == outputs[1], outputs[0].len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    // `cargo test -- --list` and filters are accepted but ignored.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 9] = [
        ("1 counterexample rank", criterion_1),
        ("2 two-spike circulants exhaustive", criterion_2),
        ("3 randomized rank suites", criterion_3),
        ("4 Taylor orders", criterion_4),
        ("5 transfer-of-volume Monte Carlo", criterion_5),
        ("6 box dimension", criterion_6),
        ("7 prevalence experiment", criterion_7),
        ("8 bound margin thresholds", criterion_8),
        ("9 thread-count determinism", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
