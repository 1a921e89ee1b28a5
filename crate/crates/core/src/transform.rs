//! Monotone scalar transforms `U` applied to solutions, with their first and
//! second derivatives.

use crate::error::{Error, Result};
use crate::matineq::TransformEval;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    /// `U(t) = t`
    Identity,
    /// `U(t) = −√(−t)` on `t < 0`
    NegSqrt,
    /// `U(t) = −log(−t)` on `t < 0`
    NegLog,
    /// `U(t) = −(−t)^c` on `t < 0`
    NegPower { exponent: f64 },
}

impl Transform {
    pub fn name(&self) -> String {
        match self {
            Transform::Identity => "identity".into(),
            Transform::NegSqrt => "-sqrt(-t)".into(),
            Transform::NegLog => "-log(-t)".into(),
            Transform::NegPower { exponent } => format!("-(-t)^{exponent}"),
        }
    }

    fn requires_negative(&self) -> bool {
        !matches!(self, Transform::Identity)
    }

    /// `(U, U', U'')` at `t`, without the monotonicity check.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !t.is_finite() || (self.requires_negative() && t >= 0.0) {
            return Err(Error::TransformDomain {
                transform: self.name(),
                value: t,
            });
        }
        let m = -t;
        Ok(match *self {
            Transform::Identity => (t, 1.0, 0.0),
            Transform::NegSqrt => {
                let s = m.sqrt();
                (-s, 0.5 / s, 0.25 / (m * s))
            }
            Transform::NegLog => (-m.ln(), 1.0 / m, 1.0 / (m * m)),
            Transform::NegPower { exponent: c } => (-m.powf(c), c * m.powf(c - 1.0), c * (1.0 - c) * m.powf(c - 2.0)),
        })
    }

    /// Evaluates the transform; rejects points outside its domain and points
    /// where `|U'|` is too small to count as strictly monotone.
    pub fn eval(&self, t: f64) -> Result<TransformEval> {
        let (u, up, upp) = self.derivatives(t)?;
        TransformEval::new(u, up, upp)
    }
}
