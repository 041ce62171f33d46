//! Success probabilities of random access codes.
//!
//! For decoding measurements `M₁, …, M_k` and an encoding `E`, the average
//! success probability is
//!
//! ```text
//! P(E) = 1/(k·Πnᵢ) · Σ_x tr[E(x)(M₁(x₁) + ⋯ + M_k(x_k))]
//! ```
//!
//! and optimizing the encoding replaces each trace by the operator norm of
//! the effect sum.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::povm::Povm;
use crate::tolerance::{GUARD_BAND, POVM_TOL};

/// Default cap on the number of cells evaluated by [`optimal_success_n`].
pub const DEFAULT_CELL_CAP: u128 = 1_000_000;

/// Labeled family of density operators, indexed row-major by outcome tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMap {
    dim: usize,
    shape: Vec<usize>,
    states: Vec<HermitianOperator>,
}

impl EncodingMap {
    pub fn new(shape: Vec<usize>, states: Vec<HermitianOperator>) -> Result<Self> {
        let cells: usize = shape.iter().product();
        if shape.is_empty() || cells == 0 || states.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "encoding shape {shape:?} needs {cells} states, got {}",
                states.len()
            )));
        }
        let dim = states[0].dim();
        for (k, s) in states.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::ShapeMismatch("state dimensions disagree".into()));
            }
            let tr = s.trace();
            if (tr - 1.0).abs() > POVM_TOL {
                return Err(Error::InvalidState(format!("state {k} has trace {tr}")));
            }
            let min = s.min_eigenvalue()?;
            if min < -POVM_TOL {
                return Err(Error::InvalidState(format!("state {k} has eigenvalue {min:e}")));
            }
        }
        Ok(Self { dim, shape, states })
    }

    /// The same state in every cell.
    pub fn constant(shape: Vec<usize>, state: HermitianOperator) -> Result<Self> {
        let cells = shape.iter().product();
        Self::new(shape, vec![state; cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn states(&self) -> &[HermitianOperator] {
        &self.states
    }

    pub fn state(&self, index: &[usize]) -> &HermitianOperator {
        &self.states[flat_index(&self.shape, index)]
    }
}

fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Row-major odometer over a multi-index.
fn advance(index: &mut [usize], shape: &[usize]) -> bool {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < shape[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

fn check_dims(ms: &[&Povm]) -> Result<usize> {
    let dim = ms
        .first()
        .ok_or_else(|| Error::ShapeMismatch("at least one measurement required".into()))?
        .dim();
    for m in ms {
        if m.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: m.dim(),
            });
        }
    }
    Ok(dim)
}

fn effect_sum(ms: &[&Povm], index: &[usize]) -> HermitianOperator {
    let mut acc = ms[0].effect(index[0]).clone();
    for (m, &x) in ms.iter().zip(index).skip(1) {
        acc += m.effect(x);
    }
    acc
}

/// Average success probability of a fixed encoding with the given decoders.
pub fn average_success(encoding: &EncodingMap, ms: &[&Povm]) -> Result<f64> {
    let dim = check_dims(ms)?;
    if encoding.dim() != dim {
        return Err(Error::DimMismatch {
            left: encoding.dim(),
            right: dim,
        });
    }
    let shape: Vec<usize> = ms.iter().map(|m| m.outcomes()).collect();
    if shape != encoding.shape() {
        return Err(Error::ShapeMismatch(format!(
            "encoding shape {:?} does not match outcome counts {shape:?}",
            encoding.shape()
        )));
    }
    let mut index = vec![0; shape.len()];
    let mut total = 0.0;
    let mut cell = 0;
    loop {
        total += encoding.states[cell].trace_product(&effect_sum(ms, &index));
        cell += 1;
        if !advance(&mut index, &shape) {
            break;
        }
    }
    Ok(total / (ms.len() * cell) as f64)
}

/// Optimal success probability for a pair, with the per-cell norms
/// `‖M₁(x) + M₂(y)‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessReport {
    pub p_bar: f64,
    /// `n x m` grid of operator norms.
    pub per_cell_norms: Vec<Vec<f64>>,
    /// Compatibility bound `½(1 + d/(nm))`; the classical bound when `n = m = d`.
    pub bound_classical: f64,
    /// `p_bar − bound_classical`.
    pub margin: f64,
    pub dim: usize,
    pub n: usize,
    pub m: usize,
}

impl SuccessReport {
    /// `Σ norms / (2nm)` recomputed from the stored grid, in row-major order.
    pub fn p_bar_from_norms(&self) -> f64 {
        let sum: f64 = self.per_cell_norms.iter().flatten().sum();
        sum / (2 * self.n * self.m) as f64
    }
}

/// `P̄(M₁, M₂) = 1/(2nm) · Σ_{x,y} ‖M₁(x) + M₂(y)‖`.
pub fn optimal_success(m1: &Povm, m2: &Povm) -> Result<SuccessReport> {
    let dim = check_dims(&[m1, m2])?;
    let (n, m) = (m1.outcomes(), m2.outcomes());
    let mut per_cell_norms = Vec::with_capacity(n);
    for x in 0..n {
        let row = (0..m)
            .map(|y| (m1.effect(x) + m2.effect(y)).operator_norm())
            .collect::<Result<Vec<_>>>()?;
        per_cell_norms.push(row);
    }
    let sum: f64 = per_cell_norms.iter().flatten().sum();
    let p_bar = sum / (2 * n * m) as f64;
    let bound = generalized_bound(dim, n, m);
    Ok(SuccessReport {
        p_bar,
        per_cell_norms,
        bound_classical: bound,
        margin: p_bar - bound,
        dim,
        n,
        m,
    })
}

/// `1/(k·d^k) · Σ_x ‖M₁(x₁) + ⋯ + M_k(x_k)‖` for `k` measurements with `d`
/// outcomes on a `d`-dimensional system.
pub fn optimal_success_n(ms: &[&Povm]) -> Result<f64> {
    optimal_success_n_capped(ms, DEFAULT_CELL_CAP)
}

pub fn optimal_success_n_capped(ms: &[&Povm], cap: u128) -> Result<f64> {
    let d = check_dims(ms)?;
    if let Some(m) = ms.iter().find(|m| m.outcomes() != d) {
        return Err(Error::ShapeMismatch(format!(
            "expected {d}-outcome measurements, got {} outcomes",
            m.outcomes()
        )));
    }
    let k = ms.len();
    let cells = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if cells > cap {
        return Err(Error::ComplexityRefusal { cells, cap });
    }
    let shape = vec![d; k];
    let mut index = vec![0; k];
    let mut total = 0.0;
    loop {
        total += effect_sum(ms, &index).operator_norm()?;
        if !advance(&mut index, &shape) {
            break;
        }
    }
    Ok(total / (k as f64 * cells as f64))
}

/// Encoding attaining [`optimal_success`]: each cell holds the projector onto
/// the leading eigenvector of `M₁(x) + M₂(y)`.
pub fn optimal_encoding(m1: &Povm, m2: &Povm) -> Result<EncodingMap> {
    check_dims(&[m1, m2])?;
    let (n, m) = (m1.outcomes(), m2.outcomes());
    let mut states = Vec::with_capacity(n * m);
    for x in 0..n {
        for y in 0..m {
            let v: Vec<Complex64> = (m1.effect(x) + m2.effect(y)).max_eigenvector()?;
            states.push(HermitianOperator::projector(&v));
        }
    }
    EncodingMap::new(vec![n, m], states)
}

/// Best classical `(2,d)` random access code: `½(1 + 1/d)`.
pub fn classical_bound_2d(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / d as f64)
}

/// Best quantum `(2,d)` random access code: `½(1 + 1/√d)`.
pub fn quantum_optimum_2d(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (d as f64).sqrt())
}

/// Upper bound on `P̄` for compatible pairs: `½(1 + d/(nm))`.
pub fn generalized_bound(d: usize, n: usize, m: usize) -> f64 {
    0.5 * (1.0 + d as f64 / (n * m) as f64)
}

/// Bound on `P̄` valid for every pair: `d(n+m)/(2nm)`.
pub fn trivial_upper_bound(d: usize, n: usize, m: usize) -> f64 {
    (d * (n + m)) as f64 / (2 * n * m) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestRegime {
    Nontrivial,
    /// `nm ≤ d`: the compatibility bound is at least 1.
    VacuousSmall,
    /// `d(n+m) ≤ d + nm`: no pair can exceed the compatibility bound.
    VacuousLarge,
}

pub fn test_regime(d: usize, n: usize, m: usize) -> TestRegime {
    if n * m <= d {
        TestRegime::VacuousSmall
    } else if d * (n + m) <= d + n * m {
        TestRegime::VacuousLarge
    } else {
        TestRegime::Nontrivial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Usefulness {
    Useful,
    NotUseful,
    /// `|lhs − rhs|` within the guard band.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UsefulnessCertificate {
    /// `Σ_{x,y} ‖M₁(x) + M₂(y)‖`.
    pub lhs: f64,
    /// `d(d+1)`.
    pub rhs: f64,
    pub verdict: Usefulness,
}

impl UsefulnessCertificate {
    pub fn is_useful(&self) -> bool {
        self.verdict == Usefulness::Useful
    }
}

/// Whether a pair of `d`-outcome measurements beats the classical `(2,d)`
/// bound, i.e. `Σ‖M₁(x) + M₂(y)‖ > d(d+1)`.
pub fn usefulness_2d(m1: &Povm, m2: &Povm) -> Result<UsefulnessCertificate> {
    usefulness_2d_with(m1, m2, GUARD_BAND)
}

pub fn usefulness_2d_with(m1: &Povm, m2: &Povm, guard: f64) -> Result<UsefulnessCertificate> {
    let d = check_dims(&[m1, m2])?;
    if m1.outcomes() != d || m2.outcomes() != d {
        return Err(Error::ShapeMismatch(format!(
            "usefulness needs {d}-outcome measurements, got {} and {}",
            m1.outcomes(),
            m2.outcomes()
        )));
    }
    let report = optimal_success(m1, m2)?;
    let lhs: f64 = report.per_cell_norms.iter().flatten().sum();
    let rhs = (d * (d + 1)) as f64;
    let verdict = if lhs > rhs + guard {
        Usefulness::Useful
    } else if lhs < rhs - guard {
        Usefulness::NotUseful
    } else {
        Usefulness::Boundary
    };
    Ok(UsefulnessCertificate { lhs, rhs, verdict })
}
