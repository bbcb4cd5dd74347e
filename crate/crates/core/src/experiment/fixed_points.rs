use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{fmt_f64, Check, CommandReport, Table};
use super::setup::STREAM_BOUNDS;
use crate::dynsys::{
    find_fixed_points, periodic_orbit_scan, tracking_remainder_order, FixedPointOptions,
};
use crate::error::Result;
use crate::fit::RemainderOrder;
use crate::polybasis::PolyBasis;
use crate::sampling::{stream_rng, unit_sphere};

/// Accepted band around the quadratic tracking order.
pub const SLOPE_BAND: (f64, f64) = (1.85, 2.15);

fn joined(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(fmt_f64).collect::<Vec<_>>().join(";")
}

fn slope_ok(order: &RemainderOrder) -> bool {
    order.is_exactly_linear() || order.slope().is_some_and(|s| (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&s))
}

pub fn fixed_points(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let system = cfg.builtin_system()?;
    let kplus = cfg.kplus_ball();
    let opts = FixedPointOptions::default();
    let set = find_fixed_points(&system, &kplus, &opts)?;
    let max_period = (2 * cfg.embedding_dim).saturating_sub(1);
    let orbits = periodic_orbit_scan(&system, &kplus, &opts, max_period)?;
    let basis = PolyBasis::enumerate(crate::dynsys::DynamicalMap::dim(&system), cfg.basis_degree())?;
    let direction = unit_sphere(&mut stream_rng(cfg.master_seed, STREAM_BOUNDS), basis.len());

    let mut table = Table::new(&[
        "index", "point", "multiplier_moduli", "hyperbolic", "tracking", "tracking_slope",
    ]);
    let mut tracking = Vec::new();
    for (i, z) in set.points.iter().enumerate() {
        let order = tracking_remainder_order(&system, z, &basis, &direction, &cfg.t_ladder)?;
        table.push(vec![
            i.to_string(),
            joined(z.iter().copied()),
            joined(set.multipliers[i].iter().map(|m| m.modulus())),
            set.hyperbolic[i].to_string(),
            if order.is_exactly_linear() { "exactly_linear" } else { "slope" }.to_string(),
            order.slope().map_or_else(|| "none".into(), fmt_f64),
        ]);
        tracking.push(order);
    }

    let mut checks = vec![
        Check::new("fixed_points_found", !set.is_empty(), format!("{} fixed points in K+", set.len())),
        Check::new("hyperbolic", set.all_hyperbolic(), "no multiplier within 0.01 of the unit circle"),
    ];
    if let Some(gap) = set.min_first_coordinate_gap() {
        checks.push(Check::new(
            "first_coordinate_separation",
            gap > 0.0,
            format!("smallest first-coordinate gap {gap:e}"),
        ));
    }
    if let Some(sep) = set.min_separation {
        checks.push(Check::new(
            "delta_below_third_of_separation",
            cfg.delta < sep / 3.0,
            format!("delta = {:e}, separation = {sep:e}", cfg.delta),
        ));
    }
    let bad: Vec<usize> = (0..tracking.len()).filter(|&i| !slope_ok(&tracking[i])).collect();
    checks.push(Check::new(
        "tracking_order",
        bad.is_empty(),
        format!("fixed points outside slope band {SLOPE_BAND:?}: {bad:?}"),
    ));

    let mut by_period = vec![0usize; max_period + 1];
    for o in &orbits {
        by_period[o.period] += 1;
    }
    let aggregates = json!({
        "system": system.to_string(),
        "fixed_points": set,
        "separation": set.min_separation,
        "first_coordinate_gap": set.min_first_coordinate_gap(),
        "periodic_orbits_by_period": (2..=max_period).map(|p| json!({"period": p, "count": by_period[p]})).collect::<Vec<_>>(),
        "periodic_orbits": orbits.iter().map(|o| json!({
            "period": o.period,
            "points": o.points.iter().map(|p| p.as_slice().to_vec()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "tracking": tracking,
        "t_ladder": cfg.t_ladder,
    });
    Ok(CommandReport {
        command: "fixed-points".into(),
        table,
        aggregates,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn henon_report() {
        let cfg = ExperimentConfig { embedding_dim: 3, ..Default::default() };
        let r = fixed_points(&cfg).unwrap();
        assert_eq!(r.table.rows.len(), 2);
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn linear_diag_has_one_fixed_point() {
        let cfg = ExperimentConfig {
            system: "linear_diag(0.5, 0.3333333333333333)".into(),
            embedding_dim: 3,
            ..Default::default()
        };
        let r = fixed_points(&cfg).unwrap();
        assert_eq!(r.table.rows.len(), 1);
        assert!(r.passed(), "{:?}", r.checks);
    }
}
