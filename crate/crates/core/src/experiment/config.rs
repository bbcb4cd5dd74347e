use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynsys::{Ball, BuiltinSystem};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Flat key-value experiment configuration. Every key is optional; missing
/// keys take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// `henon`, `ikeda`, `linear_diag(a,b)` or `rotation_scale(theta,s)`.
    pub system: String,
    pub k_center: Vec<f64>,
    pub k_radius: f64,
    /// Defaults to twice `k_radius`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kplus_radius: Option<f64>,
    pub embedding_dim: usize,
    /// Defaults to `2D - 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_degree: Option<u32>,
    pub delta: f64,
    /// Fixed coefficient radius; chosen from `a0_candidates` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    pub a0_candidates: Vec<f64>,
    /// Draws with `|c| <= a1` must move every fixed point by less than `delta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    /// Sample points in `K` drawn once and shared by every coefficient draw.
    pub cloud_size: usize,
    /// Points checked for immersivity per draw.
    pub n_points: usize,
    /// Separated pairs checked for injectivity per draw.
    pub n_pairs: usize,
    /// Points whose orbit-shift pairs `(x, phi^{k-1}(x))` are planted.
    pub n_planted: usize,
    pub n_draws: usize,
    /// Adds an extra `c = 0` draw, reported but not counted.
    pub zero_control: bool,
    pub expect_control_immersion_failure: bool,
    pub escape_orbits: usize,
    pub escape_draws: usize,
    /// Attractor sampling for systems that are not sampled uniformly.
    pub burn_in: usize,
    pub stride: usize,
    /// Sample `K` uniformly instead of from an attractor orbit.
    pub uniform_k: bool,
    pub master_seed: u64,
    pub scale_ladder: Vec<f64>,
    pub t_ladder: Vec<f64>,
    pub rank_trials: usize,
    pub rank_tolerance: f64,
    pub injectivity_floor: f64,
    pub immersion_floor: f64,
    pub min_pass_fraction: f64,
    /// Embedding dimensions for the sweep; empty means `2d+1 ..= 4d+2`.
    pub d_list: Vec<usize>,
    pub bound_samples: usize,
    pub cover_epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            system: "henon".into(),
            k_center: vec![0.0, 0.0],
            k_radius: 1.5,
            kplus_radius: None,
            embedding_dim: 10,
            basis_degree: None,
            delta: 1e-2,
            a0: None,
            a0_candidates: vec![1e-2, 1e-3, 1e-4],
            a1: None,
            cloud_size: 2000,
            n_points: 1000,
            n_pairs: 20_000,
            n_planted: 200,
            n_draws: 100,
            zero_control: true,
            expect_control_immersion_failure: false,
            escape_orbits: 1000,
            escape_draws: 50,
            burn_in: 1000,
            stride: 7,
            uniform_k: false,
            master_seed: 0,
            scale_ladder: vec![0.1, 0.05, 0.025, 0.0125],
            t_ladder: vec![1e-2, 1e-3, 1e-4, 1e-5],
            rank_trials: 200,
            rank_tolerance: 1e-8,
            injectivity_floor: 1e-12,
            immersion_floor: 1e-10,
            min_pass_fraction: 0.99,
            d_list: Vec::new(),
            bound_samples: 200,
            cover_epsilon: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn builtin_system(&self) -> Result<BuiltinSystem> {
        self.system.parse()
    }

    pub fn k_ball(&self) -> Ball {
        Ball::new(DVector::from_column_slice(&self.k_center), self.k_radius)
    }

    pub fn kplus_ball(&self) -> Ball {
        Ball::new(
            DVector::from_column_slice(&self.k_center),
            self.kplus_radius.unwrap_or(2.0 * self.k_radius),
        )
    }

    pub fn basis_degree(&self) -> u32 {
        self.basis_degree
            .unwrap_or((2 * self.embedding_dim).saturating_sub(1) as u32)
    }

    /// Checks everything that does not need the fixed points.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let sys = self.builtin_system()?;
        if self.k_center.len() != crate::dynsys::DynamicalMap::dim(&sys) {
            return bad("k_center must have the state dimension");
        }
        if !(self.k_radius.is_finite() && self.k_radius > 0.0) {
            return bad("degenerate configuration: k_radius must be positive");
        }
        let kplus = self.kplus_ball().radius;
        if !(kplus.is_finite() && kplus > self.k_radius) {
            return bad("K must lie strictly inside K+ (kplus_radius > k_radius)");
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be at least 1");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta must be positive");
        }
        if let Some(a0) = self.a0 {
            if !(a0.is_finite() && a0 >= 0.0) {
                return bad("a0 must be non-negative");
            }
        } else if self.a0_candidates.is_empty() || self.a0_candidates.iter().any(|a| a.is_nan() || *a <= 0.0) {
            return bad("a0_candidates must be non-empty and positive");
        }
        if self.scale_ladder.len() < 4 || self.scale_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad("scale_ladder needs at least four decreasing values");
        }
        if self.t_ladder.len() < 3 || self.t_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad("t_ladder needs at least three decreasing values");
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return bad("rank_tolerance must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.min_pass_fraction) {
            return bad("min_pass_fraction must lie in [0, 1]");
        }
        if self.cloud_size < 2 || self.stride == 0 {
            return bad("cloud_size must be at least 2 and stride positive");
        }
        Ok(())
    }
}
