use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the transfer-of-volume bounds. `r` singular values of the
/// `D x d_alpha` linear part are at least `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub d_alpha: usize,
    pub r: usize,
    pub sigma: f64,
    pub lipschitz: f64,
    pub epsilon: f64,
    pub a: f64,
}

impl BoundInput {
    pub fn validate(&self) -> Result<()> {
        if self.r > self.d_alpha {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds the parameter dimension {}",
                self.r, self.d_alpha
            )));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("lipschitz", self.lipschitz),
            ("epsilon", self.epsilon),
            ("a", self.a),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// A bound kept in log space together with its value clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub log_value: f64,
    pub probability: f64,
}

impl BoundValue {
    fn from_log(log_value: f64) -> Self {
        Self {
            log_value,
            probability: log_value.min(0.0).exp(),
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.log_value >= 0.0
    }
}

pub fn log_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Probability that `|A c + g0| <= L eps` for `c` uniform in `|c| <= a`:
/// `d_alpha! (L eps / (sigma a))^r`.
pub fn bound_linear(input: &BoundInput) -> Result<BoundValue> {
    input.validate()?;
    let r = input.r as f64;
    let log = log_factorial(input.d_alpha)
        + r * (input.lipschitz.ln() + input.epsilon.ln() - input.sigma.ln() - input.a.ln());
    Ok(BoundValue::from_log(log))
}

/// Log of the measure bound `2^{d_alpha} (L eps / sigma)^r a^{d_alpha - r}`.
pub fn measure_bound_linear_log(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let r = input.r as f64;
    let n = input.d_alpha as f64;
    Ok(n * std::f64::consts::LN_2
        + r * (input.lipschitz.ln() + input.epsilon.ln() - input.sigma.ln())
        + (n - r) * input.a.ln())
}

/// Probability that `|g(c)| <= L eps` for `c` uniform in `|c| <= sqrt(eps)`,
/// when the quadratic remainder of `g` is at most `L |c|^2`:
/// `d_alpha! 2^r L^r eps^{r/2} / sigma^r`. Requires `sqrt(eps) <= a`.
pub fn bound_nonlinear(input: &BoundInput) -> Result<BoundValue> {
    input.validate()?;
    if input.epsilon.sqrt() > input.a {
        return Err(Error::Hypothesis(format!(
            "sqrt(epsilon) = {} exceeds the ball radius {}",
            input.epsilon.sqrt(),
            input.a
        )));
    }
    let r = input.r as f64;
    let log = log_factorial(input.d_alpha)
        + r * (std::f64::consts::LN_2 + input.lipschitz.ln() - input.sigma.ln())
        + 0.5 * r * input.epsilon.ln();
    Ok(BoundValue::from_log(log))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Linear,
    Nonlinear,
}

/// The set being covered and the matching per-ball bound, for the five
/// injectivity and immersivity arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// Pairs `(x1, y1)` under a perturbed observation function.
    ObservationPairs,
    /// Pairs `(xi_j, x1)` of a fixed point and a point away from it.
    FixedPointPairs,
    /// Pairs `(x1, phi(x1))`.
    ShiftPairs,
    /// Separated pairs `(x1, y1)` away from fixed points and each other's orbits.
    SeparatedPairs,
    /// Unit tangent vectors at points away from fixed points.
    TangentDirections,
}

impl BoundCase {
    pub const ALL: [BoundCase; 5] = [
        Self::ObservationPairs,
        Self::FixedPointPairs,
        Self::ShiftPairs,
        Self::SeparatedPairs,
        Self::TangentDirections,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ObservationPairs => "observation_pairs",
            Self::FixedPointPairs => "fixed_point_pairs",
            Self::ShiftPairs => "shift_pairs",
            Self::SeparatedPairs => "separated_pairs",
            Self::TangentDirections => "tangent_directions",
        }
    }

    pub fn mode(&self) -> BoundMode {
        match self {
            Self::ObservationPairs => BoundMode::Linear,
            _ => BoundMode::Nonlinear,
        }
    }

    /// Box-counting exponent `p` of the covered set, for state dimension `d`.
    pub fn cover_exponent(&self, d: usize) -> usize {
        match self {
            Self::ObservationPairs | Self::SeparatedPairs => 2 * d,
            Self::FixedPointPairs | Self::ShiftPairs => d,
            Self::TangentDirections => 2 * d - 1,
        }
    }

    /// Guaranteed rank `r` of the linear part, for embedding dimension `D`.
    pub fn rank(&self, embedding_dim: usize) -> usize {
        match self {
            Self::ObservationPairs | Self::ShiftPairs => embedding_dim,
            _ => embedding_dim - 1,
        }
    }

    /// `eps` exponent of the assembled bound; positive means it vanishes as `eps -> 0`.
    pub fn margin(&self, d: usize, embedding_dim: usize) -> f64 {
        margin(self.mode(), self.rank(embedding_dim), self.cover_exponent(d))
    }

    /// Smallest `D >= 1` with a positive margin.
    pub fn threshold_dim(&self, d: usize) -> usize {
        (1..)
            .find(|&dd| self.margin(d, dd) > 0.0)
            .expect("margin grows without bound in D")
    }
}

pub fn margin(mode: BoundMode, r: usize, cover_exponent: usize) -> f64 {
    let r = r as f64;
    let p = cover_exponent as f64;
    match mode {
        BoundMode::Linear => r - p,
        BoundMode::Nonlinear => 0.5 * r - p,
    }
}

/// Cover-size law `N(eps) <= c_k / eps^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverLaw {
    pub c_k: f64,
    pub exponent: f64,
}

/// `eps -> min(1, (c_k / eps^p) * per_ball(eps))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssembledBound {
    pub law: CoverLaw,
    pub mode: BoundMode,
    pub d_alpha: usize,
    pub r: usize,
    pub sigma: f64,
    pub lipschitz: f64,
    pub a: f64,
    /// `log` of the bound at `eps = 1`.
    pub log_constant: f64,
    pub margin: f64,
}

impl AssembledBound {
    pub fn log_at(&self, epsilon: f64) -> f64 {
        self.log_constant + self.margin * epsilon.ln()
    }

    pub fn at(&self, epsilon: f64) -> f64 {
        self.log_at(epsilon).min(0.0).exp()
    }

    /// Largest `eps` below which the bound is less than one; `None` when
    /// the margin is not positive.
    pub fn crossover(&self) -> Option<f64> {
        (self.margin > 0.0).then(|| (-self.log_constant / self.margin).exp())
    }
}

/// Multiplies the per-ball bound by the cover count. The `epsilon` field of
/// `input` is ignored.
pub fn assemble_bound(law: CoverLaw, input: &BoundInput, mode: BoundMode) -> Result<AssembledBound> {
    let probe = BoundInput { epsilon: 1.0, ..*input };
    probe.validate()?;
    if !(law.c_k.is_finite() && law.c_k > 0.0) || !(law.exponent.is_finite() && law.exponent >= 0.0) {
        return Err(Error::InvalidArgument("cover law needs c_k > 0 and p >= 0".into()));
    }
    let r = input.r as f64;
    let per_ball = match mode {
        BoundMode::Linear => log_factorial(input.d_alpha) + r * (input.lipschitz.ln() - input.sigma.ln() - input.a.ln()),
        BoundMode::Nonlinear => log_factorial(input.d_alpha) + r * (std::f64::consts::LN_2 + input.lipschitz.ln() - input.sigma.ln()),
    };
    let eps_power = match mode {
        BoundMode::Linear => r,
        BoundMode::Nonlinear => 0.5 * r,
    };
    Ok(AssembledBound {
        law,
        mode,
        d_alpha: input.d_alpha,
        r: input.r,
        sigma: input.sigma,
        lipschitz: input.lipschitz,
        a: input.a,
        log_constant: law.c_k.ln() + per_ball,
        margin: eps_power - law.exponent,
    })
}
