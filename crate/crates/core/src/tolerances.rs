use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every routine.
///
/// All values are relative and must lie strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative normality threshold: `‖C*C − CC*‖ ≤ tol_normal·‖C‖²`.
    pub tol_normal: f64,
    /// Eigenvalue clustering radius, relative to `max(1, spectral radius)`.
    pub tol_cluster: f64,
    /// Linear-solve and fixed-point convergence tolerance.
    pub tol_solve: f64,
    /// Contour-quadrature stopping tolerance.
    pub tol_quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_normal: 1e-10,
            tol_cluster: 1e-8,
            tol_solve: 1e-10,
            tol_quad: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tol_normal", self.tol_normal),
            ("tol_cluster", self.tol_cluster),
            ("tol_solve", self.tol_solve),
            ("tol_quad", self.tol_quad),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {value}"
                )));
            }
        }
        Ok(())
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
    fn rejects_out_of_range() {
        let t = Tolerances {
            tol_quad: 1.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = Tolerances {
            tol_normal: 0.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = Tolerances {
            tol_cluster: f64::NAN,
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn partial_override_from_json() {
        let t: Tolerances = serde_json::from_str(r#"{"tol_solve": 1e-12}"#).unwrap();
        assert_eq!(t.tol_solve, 1e-12);
        assert_eq!(t.tol_cluster, 1e-8);
    }
}
