//! Semi-device-independent incompatibility detection from QRAC success
//! probabilities, with the derived bounds on joint measurability degree and
//! incompatibility robustness.
//!
//! The test is one-directional: a success probability above the
//! compatibility bound proves incompatibility, anything else proves nothing.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::povm::Povm;
use crate::qrac::{generalized_bound, optimal_success, test_regime, trivial_upper_bound, TestRegime};
use crate::tolerance::GUARD_BAND;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    IncompatibilityDetected,
    Inconclusive,
    TestVacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionVerdict {
    pub verdict: Verdict,
    pub p_bar: f64,
    pub bound: f64,
    /// `p_bar − bound`.
    pub margin: f64,
    pub regime: TestRegime,
    /// Set when an external estimate exceeds the bound every
    /// `d`-dimensional model obeys.
    pub suspect_estimate: bool,
}

impl DetectionVerdict {
    pub fn is_detected(&self) -> bool {
        self.verdict == Verdict::IncompatibilityDetected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncompatibilityBounds {
    /// Upper bound on the joint measurability degree, present only when
    /// incompatibility is detected.
    pub jm_degree_upper: Option<f64>,
    /// Lower bound on the incompatibility robustness, clamped at 0.
    pub robustness_lower: f64,
}

fn verdict_for(p_bar: f64, d: usize, n: usize, m: usize, guard: f64) -> DetectionVerdict {
    let bound = generalized_bound(d, n, m);
    let margin = p_bar - bound;
    let regime = test_regime(d, n, m);
    let verdict = match regime {
        TestRegime::Nontrivial if margin > guard => Verdict::IncompatibilityDetected,
        TestRegime::Nontrivial => Verdict::Inconclusive,
        _ => Verdict::TestVacuous,
    };
    DetectionVerdict {
        verdict,
        p_bar,
        bound,
        margin,
        regime,
        suspect_estimate: false,
    }
}

pub fn detect(m1: &Povm, m2: &Povm) -> Result<DetectionVerdict> {
    detect_with(m1, m2, GUARD_BAND)
}

pub fn detect_with(m1: &Povm, m2: &Povm, guard: f64) -> Result<DetectionVerdict> {
    let report = optimal_success(m1, m2)?;
    Ok(verdict_for(report.p_bar, report.dim, report.n, report.m, guard))
}

/// Detection on a pair list; each pair is handled independently.
pub fn detect_batch(pairs: &[(Povm, Povm)]) -> Vec<Result<DetectionVerdict>> {
    pairs.par_iter().map(|(a, b)| detect(a, b)).collect()
}

/// Applies the threshold test to a measured success frequency.
///
/// Rejects estimates outside `[0, 1]`.
pub fn detect_from_estimate(p_hat: f64, d: usize, n: usize, m: usize) -> Result<DetectionVerdict> {
    detect_from_estimate_with(p_hat, d, n, m, GUARD_BAND)
}

pub fn detect_from_estimate_with(p_hat: f64, d: usize, n: usize, m: usize, guard: f64) -> Result<DetectionVerdict> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidParams(format!("success estimate {p_hat} outside [0, 1]")));
    }
    check_shape(d, n, m)?;
    let mut v = verdict_for(p_hat, d, n, m, guard);
    v.suspect_estimate = p_hat > trivial_upper_bound(d, n, m) + guard;
    Ok(v)
}

fn check_shape(d: usize, n: usize, m: usize) -> Result<()> {
    if d == 0 || n == 0 || m == 0 {
        return Err(Error::InvalidParams(format!(
            "d, n, m must be positive, got ({d}, {n}, {m})"
        )));
    }
    Ok(())
}

/// `t·p_bar + (1 − t)(n + m)/(2nm)`: success of the pair after mixing both
/// measurements with weight `1 − t` of any trivial measurement.
pub fn scaled_success(p_bar: f64, t: f64, n: usize, m: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::NoiseOutOfRange(t));
    }
    Ok(t * p_bar + (1.0 - t) * (n + m) as f64 / (2 * n * m) as f64)
}

/// `(d + nm − n − m) / (2nm·p_bar − n − m)`, meaningful only when the
/// detection inequality holds.
pub fn jm_degree_formula(p_bar: f64, d: usize, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    (d as f64 + nf * mf - nf - mf) / (2.0 * nf * mf * p_bar - nf - mf)
}

/// [`jm_degree_formula`] when the detection inequality holds.
pub fn jm_degree_upper_from_p_bar(p_bar: f64, d: usize, n: usize, m: usize) -> Option<f64> {
    verdict_for(p_bar, d, n, m, GUARD_BAND)
        .is_detected()
        .then(|| jm_degree_formula(p_bar, d, n, m))
}

/// `max(0, 2nm·p_bar/(d + nm) − 1)`.
pub fn robustness_lower_from_p_bar(p_bar: f64, d: usize, n: usize, m: usize) -> f64 {
    let nm = (n * m) as f64;
    (2.0 * nm * p_bar / (d as f64 + nm) - 1.0).max(0.0)
}

pub fn jm_degree_upper(m1: &Povm, m2: &Povm) -> Result<Option<f64>> {
    let r = optimal_success(m1, m2)?;
    Ok(jm_degree_upper_from_p_bar(r.p_bar, r.dim, r.n, r.m))
}

pub fn robustness_lower(m1: &Povm, m2: &Povm) -> Result<f64> {
    let r = optimal_success(m1, m2)?;
    Ok(robustness_lower_from_p_bar(r.p_bar, r.dim, r.n, r.m))
}

pub fn incompatibility_bounds(m1: &Povm, m2: &Povm) -> Result<IncompatibilityBounds> {
    let r = optimal_success(m1, m2)?;
    Ok(IncompatibilityBounds {
        jm_degree_upper: jm_degree_upper_from_p_bar(r.p_bar, r.dim, r.n, r.m),
        robustness_lower: robustness_lower_from_p_bar(r.p_bar, r.dim, r.n, r.m),
    })
}
