use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};

/// Numerical thresholds shared by every module.
///
/// `tie` and `lp` are relative: they are multiplied by the cost scale
/// `1 + max |C_ij|` wherever they compare costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mass: f64,
    pub tie: f64,
    pub event: f64,
    pub lp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-12,
            tie: 1e-9,
            event: 1e-10,
            lp: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("tie", self.tie),
            ("event", self.event),
            ("lp", self.lp),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OtError::InvalidInput(format!(
                    "tolerance `{name}` must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Two costs are tied when `|a - b| <= tie * (1 + max(|a|, |b|))`.
    pub fn tied(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tie * (1.0 + a.abs().max(b.abs()))
    }

    /// Masses at or below this are treated as numerically zero by the solver.
    pub(crate) fn flow_eps(&self) -> f64 {
        self.mass * 1e-3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive() {
        let tol = Tolerances {
            tie: 0.0,
            ..Tolerances::default()
        };
        assert!(tol.validate().is_err());
    }

    #[test]
    fn tie_is_scale_free() {
        let tol = Tolerances::default();
        assert!(tol.tied(1e6, 1e6 + 1e-4));
        assert!(!tol.tied(1.0, 1.0 + 1e-6));
        assert!(tol.tied(0.0, 5e-10));
    }
}
