use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Linear-algebra residuals (inverse products, J² + I, torsion, metricity).
    pub linear: f64,
    /// Determinant and eigenvalue magnitudes at or below this are degenerate.
    pub degenerate: f64,
    /// Jacobi identity residual.
    pub jacobi: f64,
    /// Class-membership residuals.
    pub class: f64,
    /// Isotropic-plane guard for the bisectional curvature.
    pub isotropic: f64,
    /// Relative residual of the identity checks.
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            linear: 1e-10,
            degenerate: 1e-8,
            jacobi: 1e-10,
            class: 1e-8,
            isotropic: 1e-8,
            check: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_check(mut self, check: f64) -> Self {
        self.check = check;
        self
    }
}
