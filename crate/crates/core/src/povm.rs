//! Measurement data model: POVMs, joint POVMs and the canonical families
//! used throughout the crate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{adjoint, inner, matmul, HermitianOperator};
use crate::tolerance::POVM_TOL;

/// Draws allowed in [`random_povm`] before giving up on a singular normalizer.
pub const RANDOM_POVM_ATTEMPTS: usize = 16;
/// Smallest admissible eigenvalue of the normalizer in [`random_povm`].
pub const NORMALIZER_MIN_EIGENVALUE: f64 = 1e-12;

/// Known parametrized families, carried along as file metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    QubitDichotomic { alpha: f64, a: [f64; 3] },
    Sharp,
    NoisyMu { d: usize, noise: f64, basis: MuBasis },
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuBasis {
    Standard,
    Fourier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A finite-outcome measurement on a `dim`-dimensional system.
///
/// [`Povm::new`] only checks structure; positivity and completeness are
/// reported by [`Povm::validate`] so that invalid measurements can be loaded
/// and diagnosed. Constructors for the built-in families always produce
/// valid measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
    labels: Vec<String>,
    family: Option<Family>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Effect `outcome` has a negative eigenvalue beyond tolerance.
    Positivity { outcome: usize, min_eigenvalue: f64 },
    /// `Σ_x M(x) − 𝟙` exceeds tolerance entrywise; `defect` is its spectral norm.
    Completeness { defect: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub min_eigenvalues: Vec<f64>,
    /// Spectral norm of `Σ_x M(x) − 𝟙`.
    pub completeness_defect: f64,
    /// Largest entry modulus of `Σ_x M(x) − 𝟙`.
    pub completeness_entry_defect: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity of every effect and completeness of their sum.
pub fn validate_effects(effects: &[HermitianOperator], tol: f64) -> Result<ValidationReport> {
    let dim = effects
        .first()
        .ok_or_else(|| Error::ShapeMismatch("a POVM needs at least one effect".into()))?
        .dim();
    if let Some(e) = effects.iter().find(|e| e.dim() != dim) {
        return Err(Error::ShapeMismatch(format!(
            "effect dimensions disagree: {dim} vs {}",
            e.dim()
        )));
    }
    let mut violations = Vec::new();
    let mut min_eigenvalues = Vec::with_capacity(effects.len());
    for (outcome, e) in effects.iter().enumerate() {
        let min = e.min_eigenvalue()?;
        min_eigenvalues.push(min);
        if min < -tol {
            violations.push(Violation::Positivity {
                outcome,
                min_eigenvalue: min,
            });
        }
    }
    let defect_op = &sum_operators(effects) - &HermitianOperator::identity(dim);
    let completeness_entry_defect = defect_op.max_abs_entry();
    let completeness_defect = defect_op.spectral_norm()?;
    if completeness_entry_defect > tol {
        violations.push(Violation::Completeness {
            defect: completeness_defect,
        });
    }
    Ok(ValidationReport {
        min_eigenvalues,
        completeness_defect,
        completeness_entry_defect,
        violations,
    })
}

pub(crate) fn sum_operators(ops: &[HermitianOperator]) -> HermitianOperator {
    let mut acc = HermitianOperator::zeros(ops[0].dim());
    for op in ops {
        acc += op;
    }
    acc
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| k.to_string()).collect()
}

impl Povm {
    /// Structural constructor: at least one effect, all of equal dimension.
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let n = effects.len();
        Self::with_labels(effects, default_labels(n))
    }

    pub fn with_labels(effects: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        let dim = effects
            .first()
            .ok_or_else(|| Error::ShapeMismatch("a POVM needs at least one effect".into()))?
            .dim();
        if effects.iter().any(|e| e.dim() != dim) {
            return Err(Error::ShapeMismatch("effect dimensions disagree".into()));
        }
        if labels.len() != effects.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        Ok(Self {
            dim,
            effects,
            labels,
            family: None,
        })
    }

    /// Structural construction followed by validation at [`POVM_TOL`].
    pub fn new_validated(effects: Vec<HermitianOperator>) -> Result<Self> {
        let p = Self::new(effects)?;
        p.ensure_valid(POVM_TOL)?;
        Ok(p)
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &HermitianOperator {
        &self.effects[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate_effects(&self.effects, POVM_TOL)
    }

    pub fn validate_with(&self, tol: f64) -> Result<ValidationReport> {
        validate_effects(&self.effects, tol)
    }

    pub fn ensure_valid(&self, tol: f64) -> Result<()> {
        let report = self.validate_with(tol)?;
        match report.violations.first() {
            None => Ok(()),
            Some(Violation::Positivity {
                outcome,
                min_eigenvalue,
            }) => Err(Error::InvalidPovm(format!(
                "effect {outcome} has eigenvalue {min_eigenvalue:e}"
            ))),
            Some(Violation::Completeness { defect }) => Err(Error::InvalidPovm(format!(
                "effects sum to identity only up to {defect:e}"
            ))),
        }
    }

    /// Reorders outcomes: effect `k` of the result is effect `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.outcomes()];
        if perm.len() != self.outcomes() {
            return Err(Error::ShapeMismatch("permutation length".into()));
        }
        for &p in perm {
            if p >= seen.len() || seen[p] {
                return Err(Error::InvalidParams("not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(Self {
            dim: self.dim,
            effects: perm.iter().map(|&p| self.effects[p].clone()).collect(),
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            family: None,
        })
    }
}

/// Bloch direction and bias of a two-outcome qubit measurement
/// `M(±1) = [(1 ± α)𝟙 ± a·σ]/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDichotomicParams {
    pub alpha: f64,
    pub a: [f64; 3],
}

impl QubitDichotomicParams {
    pub fn new(alpha: f64, a: [f64; 3]) -> Result<Self> {
        let p = Self { alpha, a };
        p.check()?;
        Ok(p)
    }

    pub fn unbiased(a: [f64; 3]) -> Result<Self> {
        Self::new(0.0, a)
    }

    pub fn check(&self) -> Result<()> {
        let norm = norm3(self.a);
        if !norm.is_finite() || !self.alpha.is_finite() {
            return Err(Error::InvalidParams("non-finite qubit parameters".into()));
        }
        // a few ulps of slack so that boundary cases such as |a| = 1 built
        // from rounded components are accepted
        let slack = 4.0 * f64::EPSILON;
        if norm > 1.0 + slack {
            return Err(Error::InvalidParams(format!("|a| = {norm} exceeds 1")));
        }
        if self.alpha.abs() > 1.0 - norm + slack {
            return Err(Error::InvalidParams(format!(
                "|alpha| = {} exceeds 1 - |a| = {}",
                self.alpha.abs(),
                1.0 - norm
            )));
        }
        Ok(())
    }
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Pauli matrices σ₁, σ₂, σ₃ (`k` = 1, 2, 3).
pub fn pauli(k: usize) -> HermitianOperator {
    let c = Complex64::new;
    let rows = match k {
        1 => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        2 => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        3 => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        _ => panic!("Pauli index must be 1, 2 or 3"),
    };
    HermitianOperator::from_rows(&rows.map(|r| r.to_vec())).expect("Pauli matrices are Hermitian")
}

/// `a·σ`.
pub fn bloch_operator(a: [f64; 3]) -> HermitianOperator {
    let c = Complex64::new;
    HermitianOperator::from_rows(&[vec![c(a[2], 0.), c(a[0], -a[1])], vec![c(a[0], a[1]), c(-a[2], 0.)]])
        .expect("Bloch operators are Hermitian")
}

/// `(c₀𝟙 + a·σ)` scaled by `scale`; the building block of qubit effects.
pub fn qubit_effect(c0: f64, a: [f64; 3], scale: f64) -> HermitianOperator {
    bloch_operator(a).add_identity(c0).scale(scale)
}

pub fn qubit_dichotomic(p: QubitDichotomicParams) -> Result<Povm> {
    p.check()?;
    let plus = qubit_effect(1.0 + p.alpha, p.a, 0.5);
    let minus = qubit_effect(1.0 - p.alpha, p.a.map(|x| -x), 0.5);
    Ok(Povm::with_labels(vec![plus, minus], vec!["+1".into(), "-1".into()])?
        .with_family(Family::QubitDichotomic { alpha: p.alpha, a: p.a }))
}

/// Largest deviation of `⟨b_i|b_j⟩` from `δ_ij`.
pub fn orthonormality_defect(basis: &[Vec<Complex64>]) -> f64 {
    let mut defect: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner(a, b) - Complex64::new(expect, 0.0)).norm());
        }
    }
    defect
}

pub(crate) fn check_basis(basis: &[Vec<Complex64>]) -> Result<usize> {
    let d = basis.len();
    if d == 0 {
        return Err(Error::DimensionTooSmall { min: 1, got: 0 });
    }
    if basis.iter().any(|v| v.len() != d) {
        return Err(Error::ShapeMismatch("basis must contain d vectors of length d".into()));
    }
    let defect = orthonormality_defect(basis);
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal { defect });
    }
    Ok(d)
}

/// Sharp measurement `M(x) = |ψ_x⟩⟨ψ_x|` for an orthonormal basis.
pub fn sharp_from_basis(basis: &[Vec<Complex64>]) -> Result<Povm> {
    check_basis(basis)?;
    let effects = basis.iter().map(|v| HermitianOperator::outer(v)).collect();
    Ok(Povm::new(effects)?.with_family(Family::Sharp))
}

pub fn standard_basis(d: usize) -> Vec<Vec<Complex64>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

/// Discrete Fourier basis: `(ψ_y)_x = e^{2πi·xy/d}/√d`.
pub fn fourier_basis(d: usize) -> Vec<Vec<Complex64>> {
    let amp = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|y| {
            (0..d)
                .map(|x| {
                    // reduce mod d before scaling to keep the phase exact
                    let k = (x * y) % d;
                    Complex64::from_polar(amp, 2.0 * PI * k as f64 / d as f64)
                })
                .collect()
        })
        .collect()
}

/// The canonical mutually unbiased pair (standard, Fourier).
pub fn mu_fourier_basis(d: usize) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    Ok((standard_basis(d), fourier_basis(d)))
}

fn check_noise(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::NoiseOutOfRange(x));
    }
    Ok(())
}

/// `noise·M + (1 − noise)𝟙/d` for the sharp measurement of `basis`.
fn noisy_sharp(basis: &[Vec<Complex64>], noise: f64) -> Vec<HermitianOperator> {
    let d = basis.len();
    basis
        .iter()
        .map(|v| {
            HermitianOperator::outer(v)
                .scale(noise)
                .add_identity((1.0 - noise) / d as f64)
        })
        .collect()
}

/// Noisy mutually unbiased pair `Q_μ(x) = μ|φ_x⟩⟨φ_x| + (1−μ)𝟙/d`,
/// `P_ν(y) = ν|ψ_y⟩⟨ψ_y| + (1−ν)𝟙/d` over the (standard, Fourier) bases.
pub fn noisy_mu_pair(d: usize, mu: f64, nu: f64) -> Result<(Povm, Povm)> {
    check_noise(mu)?;
    check_noise(nu)?;
    let (phi, psi) = mu_fourier_basis(d)?;
    let q = Povm::new(noisy_sharp(&phi, mu))?.with_family(Family::NoisyMu {
        d,
        noise: mu,
        basis: MuBasis::Standard,
    });
    let p = Povm::new(noisy_sharp(&psi, nu))?.with_family(Family::NoisyMu {
        d,
        noise: nu,
        basis: MuBasis::Fourier,
    });
    Ok((q, p))
}

/// Mixes `povm` with the trivial measurement `p(x)𝟙`: `t·M(x) + (1−t)p(x)𝟙`.
pub fn depolarize(povm: &Povm, t: f64, p: &ProbabilityDistribution) -> Result<Povm> {
    check_noise(t)?;
    if p.len() != povm.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "distribution has {} outcomes, POVM has {}",
            p.len(),
            povm.outcomes()
        )));
    }
    let effects = povm
        .effects()
        .iter()
        .zip(p.weights())
        .map(|(e, &w)| e.scale(t).add_identity((1.0 - t) * w))
        .collect();
    Povm::with_labels(effects, povm.labels().to_vec())
}

/// A measurement on the product outcome set, stored row-major as an
/// `n x m` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovm {
    dim: usize,
    n: usize,
    m: usize,
    effects: Vec<HermitianOperator>,
}

impl JointPovm {
    pub fn new(n: usize, m: usize, effects: Vec<HermitianOperator>) -> Result<Self> {
        if n == 0 || m == 0 || effects.len() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "joint grid {n}x{m} needs {} effects, got {}",
                n * m,
                effects.len()
            )));
        }
        let dim = effects[0].dim();
        if effects.iter().any(|e| e.dim() != dim) {
            return Err(Error::ShapeMismatch("effect dimensions disagree".into()));
        }
        Ok(Self { dim, n, m, effects })
    }

    /// Reshapes an `n·m`-outcome POVM into an `n x m` grid.
    pub fn from_povm(povm: &Povm, n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, povm.effects().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn get(&self, x: usize, y: usize) -> &HermitianOperator {
        &self.effects[x * self.m + y]
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate_effects(&self.effects, POVM_TOL)
    }

    pub fn validate_with(&self, tol: f64) -> Result<ValidationReport> {
        validate_effects(&self.effects, tol)
    }

    pub fn first_marginal(&self) -> Vec<HermitianOperator> {
        (0..self.n)
            .map(|x| sum_operators(&self.effects[x * self.m..(x + 1) * self.m]))
            .collect()
    }

    pub fn second_marginal(&self) -> Vec<HermitianOperator> {
        (0..self.m)
            .map(|y| {
                let mut acc = HermitianOperator::zeros(self.dim);
                for x in 0..self.n {
                    acc += self.get(x, y);
                }
                acc
            })
            .collect()
    }
}

/// Marginals `M₁(x) = Σ_y G(x,y)` and `M₂(y) = Σ_x G(x,y)`.
pub fn marginals(g: &JointPovm) -> Result<(Povm, Povm)> {
    Ok((Povm::new(g.first_marginal())?, Povm::new(g.second_marginal())?))
}

fn gaussian_psd(d: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let b: Vec<Complex64> = (0..d * d)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    matmul(d, &b, &adjoint(d, &b))
}

/// A generic full-rank POVM: `A(x) = B B†` with Gaussian `B`, normalized as
/// `S^{-1/2} A(x) S^{-1/2}` with `S = Σ_x A(x)`. Deterministic per seed.
pub fn random_povm(d: usize, n: usize, seed: u64) -> Result<Povm> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParams("random POVM needs d, n >= 1".into()));
    }
    if n == 1 {
        return Ok(Povm::new(vec![HermitianOperator::identity(d)])?.with_family(Family::Random { seed }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_POVM_ATTEMPTS {
        let raw: Vec<HermitianOperator> = (0..n)
            .map(|_| HermitianOperator::hermitian_part(d, gaussian_psd(d, &mut rng)))
            .collect();
        let s = sum_operators(&raw);
        if s.min_eigenvalue()? < NORMALIZER_MIN_EIGENVALUE {
            continue;
        }
        let inv_sqrt = s.map_spectrum(|v| 1.0 / v.sqrt())?;
        let effects = raw.iter().map(|a| a.sandwich(&inv_sqrt)).collect();
        return Ok(Povm::new(effects)?.with_family(Family::Random { seed }));
    }
    Err(Error::SingularNormalizer {
        attempts: RANDOM_POVM_ATTEMPTS,
    })
}

/// A random `n x m` joint POVM; its marginals form a compatible pair.
pub fn random_joint_povm(d: usize, n: usize, m: usize, seed: u64) -> Result<JointPovm> {
    JointPovm::from_povm(&random_povm(d, n * m, seed)?, n, m)
}
