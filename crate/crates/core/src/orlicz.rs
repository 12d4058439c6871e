//! Orlicz functions: evaluation, right derivative, inverse, the growth
//! indices `a = inf tΦ'(t)/Φ(t)` and `b = sup tΦ'(t)/Φ(t)`, and the
//! doubling (Δ2) condition.
//!
//! The family set is closed so that derivatives and, where they exist,
//! index values are exact:
//!
//! | descriptor      | Φ(t)                        | constraints                  |
//! |-----------------|-----------------------------|------------------------------|
//! | `pow:p`         | t^p                         | p ≥ 1                        |
//! | `plog:a,b`      | t^a ln(1 + t^b)             | a > 1, b > 0                 |
//! | `psin:p,c`      | t^p (1 + c sin(p ln t))     | 0 < c < 1/2, p > 1/(1 - 2c)  |
//! | `spow:lambda,p` | λ t^p                       | λ > 0, p ≥ 1                 |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect_decreasing, bracket_decreasing, log_grid};

pub const DEFAULT_GRID_MIN: f64 = 1e-12;
pub const DEFAULT_GRID_MAX: f64 = 1e16;
pub const DEFAULT_GRID_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Power { p: f64 },
    PowerLog { a: f64, b: f64 },
    PowerSin { p: f64, c: f64 },
    ScaledPower { lambda: f64, p: f64 },
}

/// A validated Orlicz function. Construct through the family constructors
/// or by parsing a descriptor such as `plog:2,1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrliczFunction(Family);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    ClosedForm,
    GridEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczIndices {
    pub lower: f64,
    pub upper: f64,
    pub method: IndexMethod,
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta2 {
    pub holds: bool,
    /// Largest Φ(2t)/Φ(t) seen on the probe grid.
    pub witness: f64,
}

/// Where a pair of indices sits relative to the exponents 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexRegime {
    /// 1 < a ≤ b < 2
    Low,
    /// 2 < a ≤ b < ∞
    High,
    /// 1 < a ≤ 2 ≤ b < ∞
    OpenStrip,
    /// a ≤ 1 or b = ∞
    Degenerate,
}

impl OrliczIndices {
    pub fn regime(&self) -> IndexRegime {
        if self.lower <= 1.0 || !self.upper.is_finite() {
            IndexRegime::Degenerate
        } else if self.upper < 2.0 {
            IndexRegime::Low
        } else if self.lower > 2.0 {
            IndexRegime::High
        } else {
            IndexRegime::OpenStrip
        }
    }

    /// 1 < a ≤ b < ∞, the hypothesis shared by most of the martingale results.
    pub fn is_reflexive_range(&self) -> bool {
        self.lower > 1.0 && self.upper.is_finite()
    }
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        positive_finite("p", p)?;
        if p < 1.0 {
            return Err(invalid(format!("pow requires p >= 1, got {p}")));
        }
        Ok(OrliczFunction(Family::Power { p }))
    }

    pub fn power_log(a: f64, b: f64) -> Result<Self> {
        positive_finite("a", a)?;
        positive_finite("b", b)?;
        if a <= 1.0 {
            return Err(invalid(format!("plog requires a > 1, got {a}")));
        }
        Ok(OrliczFunction(Family::PowerLog { a, b }))
    }

    pub fn power_sin(p: f64, c: f64) -> Result<Self> {
        positive_finite("p", p)?;
        positive_finite("c", c)?;
        if c >= 0.5 {
            return Err(invalid(format!("psin requires 0 < c < 1/2, got {c}")));
        }
        if p <= 1.0 / (1.0 - 2.0 * c) {
            return Err(invalid(format!("psin requires p > 1/(1-2c), got p={p}, c={c}")));
        }
        Ok(OrliczFunction(Family::PowerSin { p, c }))
    }

    pub fn scaled_power(lambda: f64, p: f64) -> Result<Self> {
        positive_finite("lambda", lambda)?;
        positive_finite("p", p)?;
        if p < 1.0 {
            return Err(invalid(format!("spow requires p >= 1, got {p}")));
        }
        Ok(OrliczFunction(Family::ScaledPower { lambda, p }))
    }

    pub fn family(&self) -> Family {
        self.0
    }

    /// Φ(t) for `t >= 0`, with input validation.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("Φ is defined on finite t >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// Φ(t) without validation; `t` must be finite and nonnegative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match self.0 {
            Family::Power { p } => t.powf(p),
            Family::PowerLog { a, b } => t.powf(a) * t.powf(b).ln_1p(),
            Family::PowerSin { p, c } => t.powf(p) * (1.0 + c * (p * t.ln()).sin()),
            Family::ScaledPower { lambda, p } => lambda * t.powf(p),
        }
    }

    /// Right derivative Φ'(t) for `t > 0`. All families are C¹ on (0, ∞).
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t <= 0.0 {
            return Err(invalid(format!("Φ' requires finite t > 0, got {t}")));
        }
        Ok(match self.0 {
            Family::Power { p } => p * t.powf(p - 1.0),
            Family::PowerLog { a, b } => {
                let u = t.powf(b);
                let head = t.powf(a - 1.0);
                head * (a * u.ln_1p() + b * (u / (1.0 + u)))
            }
            Family::PowerSin { p, c } => {
                let phase = p * t.ln();
                p * t.powf(p - 1.0) * (1.0 + c * phase.sin() + c * phase.cos())
            }
            Family::ScaledPower { lambda, p } => lambda * p * t.powf(p - 1.0),
        })
    }

    /// Φ⁻¹(u): the unique t ≥ 0 with Φ(t) = u.
    ///
    /// Pure powers invert in closed form; the other families bracket by
    /// doubling from [0, 1] and bisect to full double precision.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || u < 0.0 {
            return Err(invalid(format!("Φ⁻¹ is defined on finite u >= 0, got {u}")));
        }
        Ok(self.inverse_value(u))
    }

    pub(crate) fn inverse_value(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        match self.0 {
            Family::Power { p } => u.powf(1.0 / p),
            Family::ScaledPower { lambda, p } => (u / lambda).powf(1.0 / p),
            _ => {
                let neg = |t: f64| -self.value(t);
                let (lo, hi) = bracket_decreasing(&neg, -u, 1.0);
                bisect_decreasing(neg, -u, lo, hi, 0.0)
            }
        }
    }

    /// Exact indices where known: `pow:p` and `spow` give (p, p), `plog:a,b`
    /// gives (a, a + b). `psin` has an oscillating ratio tΦ'/Φ and is
    /// reported as unavailable.
    pub fn indices_closed_form(&self) -> Option<OrliczIndices> {
        let (lower, upper) = match self.0 {
            Family::Power { p } | Family::ScaledPower { p, .. } => (p, p),
            Family::PowerLog { a, b } => (a, a + b),
            Family::PowerSin { .. } => return None,
        };
        Some(OrliczIndices {
            lower,
            upper,
            method: IndexMethod::ClosedForm,
            grid: None,
        })
    }

    /// The ratio tΦ'(t)/Φ(t).
    pub fn index_ratio(&self, t: f64) -> Result<f64> {
        let phi = self.evaluate(t)?;
        if phi <= 0.0 {
            return Err(Error::PreconditionViolation(format!("Φ({t}) = 0 at positive t")));
        }
        Ok(t * self.derivative(t)? / phi)
    }

    /// Min and max of tΦ'(t)/Φ(t) over a log-spaced grid.
    pub fn indices_estimate(&self, grid_min: f64, grid_max: f64, points: usize) -> Result<OrliczIndices> {
        if !(grid_min > 0.0 && grid_min < grid_max && grid_max.is_finite()) {
            return Err(invalid(format!("grid must satisfy 0 < min < max, got [{grid_min}, {grid_max}]")));
        }
        if points < 2 {
            return Err(invalid("grid needs at least two points"));
        }
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for t in log_grid(grid_min, grid_max, points) {
            let r = self.index_ratio(t)?;
            lower = lower.min(r);
            upper = upper.max(r);
        }
        Ok(OrliczIndices {
            lower,
            upper,
            method: IndexMethod::GridEstimate,
            grid: Some(GridSpec {
                min: grid_min,
                max: grid_max,
                points,
            }),
        })
    }

    /// Closed-form indices when available, otherwise the default grid estimate.
    pub fn indices(&self) -> OrliczIndices {
        self.indices_closed_form().unwrap_or_else(|| {
            self.indices_estimate(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
                .expect("default grid is valid for every family")
        })
    }

    pub fn delta2_check(&self) -> Delta2 {
        let est = self
            .indices_estimate(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
            .expect("default grid is valid for every family");
        let witness = log_grid(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
            .into_iter()
            .map(|t| self.value(2.0 * t) / self.value(t))
            .fold(0.0, f64::max);
        Delta2 {
            holds: est.upper.is_finite(),
            witness,
        }
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::Power { p } => write!(f, "pow:{p}"),
            Family::PowerLog { a, b } => write!(f, "plog:{a},{b}"),
            Family::PowerSin { p, c } => write!(f, "psin:{p},{c}"),
            Family::ScaledPower { lambda, p } => write!(f, "spow:{lambda},{p}"),
        }
    }
}

impl FromStr for OrliczFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("expected <family>:<params>, got {s:?}")))?;
        let params = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("bad numeric parameter {a:?} in {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(invalid(format!("{name} takes {n} parameter(s), got {}", params.len())))
            }
        };
        match name.trim() {
            "pow" => {
                want(1)?;
                Self::power(params[0])
            }
            "plog" => {
                want(2)?;
                Self::power_log(params[0], params[1])
            }
            "psin" => {
                want(2)?;
                Self::power_sin(params[0], params[1])
            }
            "spow" => {
                want(2)?;
                Self::scaled_power(params[0], params[1])
            }
            other => Err(invalid(format!("unknown Orlicz family {other:?}"))),
        }
    }
}

impl Serialize for OrliczFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrliczFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
