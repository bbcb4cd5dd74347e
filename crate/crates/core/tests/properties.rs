use delaymap::polybasis::{binomial, PolyBasis};
use delaymap::prevalence::{
    assemble_bound, bound_linear, bound_nonlinear, box_dimension, greedy_cover, margin, wilson_interval, BoundCase,
    BoundInput, BoundMode, CoverLaw,
};
use delaymap::sampling::{separated_cube_points, stream_rng, uniform_ball, unit_sphere};
use delaymap::dynsys::Ball;
use delaymap::structmat::{circulant, two_spike_row, vandermonde, DEFAULT_REL_TOLERANCE};
use nalgebra::DVector;
use proptest::prelude::*;

fn points(seed: u64, dim: usize, n: usize) -> Vec<DVector<f64>> {
    let mut rng = stream_rng(seed, 0);
    let ball = Ball::centered(dim, 1.0);
    (0..n).map(|_| uniform_ball(&mut rng, &ball)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_size_is_binomial(dim in 1usize..4, degree in 0u32..8) {
        let basis = PolyBasis::enumerate(dim, degree).unwrap();
        prop_assert_eq!(basis.len() as u128, binomial(dim as u64 + degree as u64, degree as u64));
        let degrees: Vec<u32> = basis.indices().iter().map(|a| a.degree()).collect();
        prop_assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
        for (i, a) in basis.indices().iter().enumerate() {
            prop_assert_eq!(basis.position(a), Some(i));
        }
    }

    #[test]
    fn monomials_are_products_of_powers(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let basis = PolyBasis::enumerate(2, 4).unwrap();
        let values = basis.eval_monomials(&[x, y]).unwrap();
        for (a, v) in basis.indices().iter().zip(values.iter()) {
            let e = a.exponents();
            prop_assert!((v - x.powi(e[0] as i32) * y.powi(e[1] as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_spike_circulants_have_full_row_rank(width in 2usize..10, j1 in 0usize..10, gap in 1usize..10) {
        let j2 = j1 + gap;
        prop_assume!(j2 < 2 * width - 1);
        let row = two_spike_row(j1, j2);
        let mut padded = row.clone();
        padded.resize(row.len().max(width + j2), 0.0);
        let c = circulant(&padded, width).unwrap();
        prop_assert_eq!(c.rank(DEFAULT_REL_TOLERANCE).unwrap().numerical_rank, width);
    }

    #[test]
    fn vandermonde_on_separated_nodes_has_full_rank(seed in any::<u64>(), n in 1usize..6) {
        let nodes = separated_cube_points(&mut stream_rng(seed, 0), 2, n, 0.1);
        let basis = PolyBasis::enumerate(2, n as u32 - 1).unwrap();
        let v = vandermonde(&basis, &nodes).unwrap();
        prop_assert_eq!(v.rank(1e-10).unwrap().numerical_rank, n);
    }

    #[test]
    fn bounds_increase_with_epsilon(r in 1usize..8, sigma in 0.01f64..2.0, l in 0.1f64..10.0, e in 1e-8f64..1e-2) {
        let small = BoundInput { d_alpha: 20, r, sigma, lipschitz: l, epsilon: e, a: 1.0 };
        let large = BoundInput { epsilon: 2.0 * e, ..small };
        prop_assert!(bound_linear(&small).unwrap().log_value < bound_linear(&large).unwrap().log_value);
        prop_assert!(bound_nonlinear(&small).unwrap().log_value < bound_nonlinear(&large).unwrap().log_value);
        let p = bound_linear(&small).unwrap().probability;
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn assembled_bound_has_margin_slope(r in 1usize..12, cover in 0usize..8, c_k in 1.0f64..100.0) {
        let input = BoundInput { d_alpha: 30, r, sigma: 0.5, lipschitz: 2.0, epsilon: 1.0, a: 1.0 };
        for mode in [BoundMode::Linear, BoundMode::Nonlinear] {
            let b = assemble_bound(CoverLaw { c_k, exponent: cover as f64 }, &input, mode).unwrap();
            prop_assert_eq!(b.margin, margin(mode, r, cover));
            let slope = b.log_at(1e-3) - b.log_at(1e-2);
            prop_assert!((slope + b.margin * std::f64::consts::LN_10).abs() < 1e-9);
            if let Some(x) = b.crossover() {
                prop_assert!(b.log_at(x).abs() < 1e-6 * b.log_constant.abs().max(1.0));
            }
        }
    }

    #[test]
    fn covers_cover_and_counts_grow(seed in any::<u64>(), eps in 0.05f64..0.5) {
        let pts = points(seed, 2, 300);
        let cover = greedy_cover(&pts, eps).unwrap();
        prop_assert!(cover.max_distance <= eps);
        prop_assert_eq!(cover.assignments.len(), pts.len());
        let finer = greedy_cover(&pts, eps / 2.0).unwrap();
        prop_assert!(finer.centers.len() >= cover.centers.len());
    }

    #[test]
    fn wilson_interval_contains_the_proportion(trials in 1usize..500, frac in 0.0f64..=1.0, z in 0.5f64..3.0) {
        let successes = (frac * trials as f64).round() as usize;
        let (lo, hi) = wilson_interval(successes, trials, z);
        let p = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn unit_sphere_samples_have_unit_norm(seed in any::<u64>(), dim in 1usize..50) {
        let v = unit_sphere(&mut stream_rng(seed, 3), dim);
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn margins_turn_positive_at_thresholds() {
    for d in 1..=4 {
        for case in BoundCase::ALL {
            let t = case.threshold_dim(d);
            assert!(case.margin(d, t) > 0.0, "{} d={d}", case.name());
            assert!(case.margin(d, t - 1) <= 0.0, "{} d={d}", case.name());
        }
    }
}

#[test]
fn box_dimension_of_a_segment() {
    let pts: Vec<DVector<f64>> = (0..2000).map(|i| DVector::from_column_slice(&[i as f64 / 1999.0, 0.0])).collect();
    let est = box_dimension(&pts, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
    assert!((est.dimension - 1.0).abs() < 0.1, "{est:?}");
}
