use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DynamicalMap, SecondDerivative};
use crate::error::Error;

/// Maps shipped with the crate, all with analytic first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BuiltinSystem {
    /// `(x, y) -> (1 - a x^2 + y, b x)`.
    Henon { a: f64, b: f64 },
    /// `z -> 1 + u z exp(i t)`, `t = 0.4 - 6 / (1 + |z|^2)`.
    Ikeda { u: f64 },
    /// `(x, y) -> (a x, b y)`.
    LinearDiag { a: f64, b: f64 },
    /// `x -> scale * R(theta) x`.
    RotationScale { theta: f64, scale: f64 },
}

impl BuiltinSystem {
    pub fn henon() -> Self {
        Self::Henon { a: 1.4, b: 0.3 }
    }

    pub fn ikeda() -> Self {
        Self::Ikeda { u: 0.9 }
    }

    /// Builds a system from its name and optional parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, Error> {
        let want = |n: usize| -> Result<(), Error> {
            if params.is_empty() || params.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "system `{name}` takes {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        let p = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        match name {
            "henon" => {
                want(2)?;
                Ok(Self::Henon { a: p(0, 1.4), b: p(1, 0.3) })
            }
            "ikeda" => {
                want(1)?;
                Ok(Self::Ikeda { u: p(0, 0.9) })
            }
            "linear_diag" => {
                want(2)?;
                Ok(Self::LinearDiag { a: p(0, 0.5), b: p(1, 1.0 / 3.0) })
            }
            "rotation_scale" => {
                want(2)?;
                Ok(Self::RotationScale { theta: p(0, 0.0), scale: p(1, 1.0) })
            }
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Henon { .. } => "henon",
            Self::Ikeda { .. } => "ikeda",
            Self::LinearDiag { .. } => "linear_diag",
            Self::RotationScale { .. } => "rotation_scale",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Henon { a, b } | Self::LinearDiag { a, b } => vec![a, b],
            Self::Ikeda { u } => vec![u],
            Self::RotationScale { theta, scale } => vec![theta, scale],
        }
    }
}

impl fmt::Display for BuiltinSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.kind(), params.join(","))
    }
}

/// Accepts `henon`, `henon(1.4,0.3)`, `linear_diag(0.5,0.25)` and so on.
impl FromStr for BuiltinSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c > open)
                    .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
                let inner = &s[open + 1..close];
                let params = inner
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Config(format!("bad parameter `{t}`: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (s[..open].trim(), params)
            }
            None => (s, Vec::new()),
        };
        Self::from_name(name, &params)
    }
}

// Ikeda helper quantities at (x, y).
struct IkedaParts {
    c: f64,
    s: f64,
    a: f64,
    b: f64,
    tx: f64,
    ty: f64,
    txx: f64,
    txy: f64,
    tyy: f64,
}

fn ikeda_parts(x: f64, y: f64) -> IkedaParts {
    let q = 1.0 + x * x + y * y;
    let t = 0.4 - 6.0 / q;
    let (s, c) = t.sin_cos();
    let q2 = q * q;
    let q3 = q2 * q;
    IkedaParts {
        c,
        s,
        a: x * c - y * s,
        b: x * s + y * c,
        tx: 12.0 * x / q2,
        ty: 12.0 * y / q2,
        txx: 12.0 / q2 - 48.0 * x * x / q3,
        txy: -48.0 * x * y / q3,
        tyy: 12.0 / q2 - 48.0 * y * y / q3,
    }
}

impl DynamicalMap for BuiltinSystem {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        self.to_string()
    }

    fn apply(&self, p: &DVector<f64>) -> DVector<f64> {
        let (x, y) = (p[0], p[1]);
        match *self {
            Self::Henon { a, b } => DVector::from_column_slice(&[1.0 - a * x * x + y, b * x]),
            Self::Ikeda { u } => {
                let k = ikeda_parts(x, y);
                DVector::from_column_slice(&[1.0 + u * k.a, u * k.b])
            }
            Self::LinearDiag { a, b } => DVector::from_column_slice(&[a * x, b * y]),
            Self::RotationScale { theta, scale } => {
                let (s, c) = theta.sin_cos();
                DVector::from_column_slice(&[scale * (c * x - s * y), scale * (s * x + c * y)])
            }
        }
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (x, y) = (p[0], p[1]);
        match *self {
            Self::Henon { a, b } => DMatrix::from_row_slice(2, 2, &[-2.0 * a * x, 1.0, b, 0.0]),
            Self::Ikeda { u } => {
                let k = ikeda_parts(x, y);
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        u * (k.c - k.b * k.tx),
                        u * (-k.s - k.b * k.ty),
                        u * (k.s + k.a * k.tx),
                        u * (k.c + k.a * k.ty),
                    ],
                )
            }
            Self::LinearDiag { a, b } => DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]),
            Self::RotationScale { theta, scale } => {
                let (s, c) = theta.sin_cos();
                DMatrix::from_row_slice(2, 2, &[scale * c, -scale * s, scale * s, scale * c])
            }
        }
    }

    fn second_derivative(&self, p: &DVector<f64>) -> SecondDerivative {
        let (x, y) = (p[0], p[1]);
        let mut out = SecondDerivative::zeros(2);
        match *self {
            Self::Henon { a, .. } => {
                out.components[0][(0, 0)] = -2.0 * a;
            }
            Self::Ikeda { u } => {
                let k = ikeda_parts(x, y);
                // d(A)/dx = c - B t_x, d(A)/dy = -s - B t_y, and similarly for B.
                let ax = k.c - k.b * k.tx;
                let ay = -k.s - k.b * k.ty;
                let bx = k.s + k.a * k.tx;
                let by = k.c + k.a * k.ty;
                let f1xx = u * (-k.s * k.tx - bx * k.tx - k.b * k.txx);
                let f1xy = u * (-k.s * k.ty - by * k.tx - k.b * k.txy);
                let f1yy = u * (-k.c * k.ty - by * k.ty - k.b * k.tyy);
                let f2xx = u * (k.c * k.tx + ax * k.tx + k.a * k.txx);
                let f2xy = u * (k.c * k.ty + ay * k.tx + k.a * k.txy);
                let f2yy = u * (-k.s * k.ty + ay * k.ty + k.a * k.tyy);
                out.components[0] = DMatrix::from_row_slice(2, 2, &[f1xx, f1xy, f1xy, f1yy]);
                out.components[1] = DMatrix::from_row_slice(2, 2, &[f2xx, f2xy, f2xy, f2yy]);
            }
            Self::LinearDiag { .. } | Self::RotationScale { .. } => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{jacobian_fd_error, second_derivative_fd_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn henon_values() {
        let h = BuiltinSystem::henon();
        assert_eq!(h.apply(&v(&[0.0, 0.0])), v(&[1.0, 0.0]));
        let j = h.jacobian(&v(&[1.0, 0.0]));
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[-2.8, 1.0, 0.3, 0.0]));
    }

    #[test]
    fn linear_diag_jacobian_is_constant() {
        let s = BuiltinSystem::LinearDiag { a: 0.5, b: 1.0 / 3.0 };
        let j = s.jacobian(&v(&[7.0, -3.0]));
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0 / 3.0]));
    }

    #[test]
    fn parse_names() {
        assert_eq!("henon".parse::<BuiltinSystem>().unwrap(), BuiltinSystem::henon());
        assert_eq!(
            "linear_diag(0.5, 0.25)".parse::<BuiltinSystem>().unwrap(),
            BuiltinSystem::LinearDiag { a: 0.5, b: 0.25 }
        );
        assert!(matches!(
            "lorenz".parse::<BuiltinSystem>(),
            Err(Error::UnknownSystem(_))
        ));
        assert!("henon(1.0)".parse::<BuiltinSystem>().is_err());
        let s = BuiltinSystem::ikeda();
        assert_eq!(s.to_string().parse::<BuiltinSystem>().unwrap(), s);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let systems = [
            BuiltinSystem::henon(),
            BuiltinSystem::ikeda(),
            BuiltinSystem::LinearDiag { a: 0.5, b: 1.0 / 3.0 },
            BuiltinSystem::RotationScale { theta: 0.7, scale: 0.9 },
        ];
        let pts: Vec<DVector<f64>> = (0..20)
            .map(|_| v(&[rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]))
            .collect();
        for s in systems {
            assert!(jacobian_fd_error(&s, &pts) <= 1e-5, "{s}");
            assert!(second_derivative_fd_error(&s, &pts) <= 1e-4, "{s}");
            for p in &pts {
                assert!(s.jacobian(p).determinant().abs() > 0.0);
            }
        }
    }
}
