//! Numerical tolerances shared by the library.
//!
//! Every threshold has a module-level default constant. Callers that need
//! different values build a [`Tolerances`] and use the `*_with` variants of
//! the affected operations.

use crate::error::{Error, Result};

/// Entrywise asymmetry allowed when constructing a Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Minimum eigenvalue below which a norm input is rejected as non-PSD.
pub const NEGATIVE_OPERATOR_TOL: f64 = 1e-8;
/// Positivity and completeness tolerance for POVM validation.
pub const POVM_TOL: f64 = 1e-10;
/// Guard band applied to strict inequalities (usefulness, detection).
pub const GUARD_BAND: f64 = 1e-10;
/// Eigenvalues within this distance of the maximum are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Guard band for the noisy mutually-unbiased region thresholds.
pub const REGION_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub negative_operator: f64,
    pub povm: f64,
    pub guard: f64,
    pub degeneracy: f64,
    pub region: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            negative_operator: NEGATIVE_OPERATOR_TOL,
            povm: POVM_TOL,
            guard: GUARD_BAND,
            degeneracy: DEGENERACY_TOL,
            region: REGION_GUARD,
        }
    }
}

impl Tolerances {
    /// Names accepted by [`Tolerances::set`].
    pub const NAMES: [&'static str; 6] = [
        "hermitian",
        "negative_operator",
        "povm",
        "guard",
        "degeneracy",
        "region",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParams(format!(
                "tolerance {name} must be a finite nonnegative number, got {value}"
            )));
        }
        let slot = match name {
            "hermitian" => &mut self.hermitian,
            "negative_operator" => &mut self.negative_operator,
            "povm" => &mut self.povm,
            "guard" => &mut self.guard,
            "degeneracy" => &mut self.degeneracy,
            "region" => &mut self.region,
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown tolerance '{other}' (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_known_and_unknown() {
        let mut t = Tolerances::default();
        t.set("guard", 1e-6).unwrap();
        assert_eq!(t.guard, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("povm", -1.0).is_err());
        assert!(t.set("povm", f64::NAN).is_err());
    }
}
