//! Dense complex Hermitian matrices and a cyclic Jacobi eigensolver.
//!
//! Everything in this crate works with small operators (d up to ~16), so the
//! representation is a flat row-major `Vec<Complex64>` and the eigensolver is
//! the classical cyclic Jacobi method with complex 2x2 rotations.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{DEGENERACY_TOL, HERMITIAN_TOL, NEGATIVE_OPERATOR_TOL};

/// Sweep limit for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Convergence threshold on off-diagonal Frobenius mass, relative to `‖H‖_F`.
pub const JACOBI_REL_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A `d x d` complex Hermitian matrix.
///
/// Construction checks that the input is Hermitian within
/// [`HERMITIAN_TOL`] and then stores the exactly Hermitian part, so every
/// value of this type is Hermitian to the last bit.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Eigenvalues sorted nonincreasing, with matching unit eigenvectors when
/// requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
}

/// Raw output of the Jacobi iteration, in the order the rotations left it.
struct Decomposition {
    values: Vec<f64>,
    /// Row-major unitary whose columns are eigenvectors.
    vectors: Vec<Complex64>,
}

impl HermitianOperator {
    /// Builds an operator from row-major entries, checking the Hermitian
    /// property against [`HERMITIAN_TOL`].
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(dim, entries, HERMITIAN_TOL)
    }

    pub fn with_tolerance(dim: usize, entries: Vec<Complex64>, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, got: 0 });
        }
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for (k, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: k / dim,
                    col: k % dim,
                });
            }
        }
        let mut asymmetry: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i].conj();
                asymmetry = asymmetry.max((a - b).norm());
            }
        }
        if asymmetry > tol {
            return Err(Error::NonHermitianInput { asymmetry, tol });
        }
        Ok(Self::hermitian_part(dim, entries))
    }

    /// Hermitian part `(A + A†)/2` of an arbitrary square matrix. Used
    /// internally after products that are Hermitian in exact arithmetic.
    pub(crate) fn hermitian_part(dim: usize, mut entries: Vec<Complex64>) -> Self {
        for i in 0..dim {
            let d = &mut entries[i * dim + i];
            d.im = 0.0;
            for j in (i + 1)..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                // leave exactly Hermitian pairs untouched so signed zeros survive
                if a != b.conj() {
                    let avg = (a + b.conj()) * 0.5;
                    entries[i * dim + j] = avg;
                    entries[j * dim + i] = avg.conj();
                }
            }
        }
        Self { dim, entries }
    }

    /// Builds an operator from nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("matrix rows must all have length d".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.entries[i * dim + i] = Complex64::new(scale, 0.0);
        }
        out
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut out = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            out.entries[i * values.len() + i] = Complex64::new(v, 0.0);
        }
        out
    }

    /// The rank-one operator `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                entries.push(a * b.conj());
            }
        }
        Self::hermitian_part(dim, entries)
    }

    /// Projector onto the normalized span of `v`.
    pub fn projector(v: &[Complex64]) -> Self {
        let norm = vector_norm(v);
        assert!(norm > 0.0, "cannot project onto the zero vector");
        let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::outer(&unit)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s·𝟙`.
    pub fn add_identity(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i].re += s;
        }
        out
    }

    /// `H v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|H|v⟩`, real for Hermitian `H`.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let hv = self.apply(v);
        v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `tr[self · other]`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.entries[i * d + j] * other.entries[j * d + i]).re;
            }
        }
        acc
    }

    /// `outer · self · outer`, Hermitian whenever `outer` is.
    pub fn sandwich(&self, outer: &Self) -> Self {
        assert_eq!(self.dim, outer.dim);
        let tmp = matmul(self.dim, &outer.entries, &self.entries);
        Self::hermitian_part(self.dim, matmul(self.dim, &tmp, &outer.entries))
    }

    /// `U · self · U†` for a general square `U` given row-major.
    pub fn conjugate_by(&self, unitary: &[Complex64]) -> Self {
        assert_eq!(unitary.len(), self.dim * self.dim);
        let tmp = matmul(self.dim, unitary, &self.entries);
        Self::hermitian_part(self.dim, matmul(self.dim, &tmp, &adjoint(self.dim, unitary)))
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dec = self.jacobi()?;
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for k in 0..d {
            let w = f(dec.values[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let vi = dec.vectors[i * d + k] * w;
                for j in 0..d {
                    entries[i * d + j] += vi * dec.vectors[j * d + k].conj();
                }
            }
        }
        Ok(Self::hermitian_part(d, entries))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = self.jacobi()?.values;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    /// Full spectral decomposition, eigenvalues nonincreasing.
    pub fn eigen(&self) -> Result<Spectrum> {
        let dec = self.jacobi()?;
        let d = self.dim;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| dec.values[b].total_cmp(&dec.values[a]));
        let eigenvalues = order.iter().map(|&k| dec.values[k]).collect();
        let eigenvectors = order
            .iter()
            .map(|&k| {
                let mut v: Vec<Complex64> = (0..d).map(|i| dec.vectors[i * d + k]).collect();
                canonicalize_phase(&mut v);
                v
            })
            .collect();
        Ok(Spectrum {
            eigenvalues,
            eigenvectors: Some(eigenvectors),
        })
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.jacobi()?.values.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.jacobi()?.values.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Operator norm of a positive semidefinite operator.
    pub fn operator_norm(&self) -> Result<f64> {
        self.operator_norm_with(NEGATIVE_OPERATOR_TOL)
    }

    pub fn operator_norm_with(&self, negative_tol: f64) -> Result<f64> {
        let values = self.jacobi()?.values;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -negative_tol {
            return Err(Error::NegativeOperator { min_eigenvalue: min });
        }
        Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Spectral norm `max |λ|`, valid for any Hermitian operator.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.jacobi()?.values.into_iter().fold(0.0, |acc, v| acc.max(v.abs())))
    }

    /// Unit eigenvector of the largest eigenvalue.
    ///
    /// Among eigenvalues within [`DEGENERACY_TOL`] of the maximum, the one
    /// occupying the lowest column of the accumulated rotation is chosen; the
    /// first nonzero component is then made real and positive.
    pub fn max_eigenvector(&self) -> Result<Vec<Complex64>> {
        Ok(self.max_eigenpair()?.1)
    }

    pub fn max_eigenpair(&self) -> Result<(f64, Vec<Complex64>)> {
        let dec = self.jacobi()?;
        let d = self.dim;
        let max = dec.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = dec
            .values
            .iter()
            .position(|&v| v >= max - DEGENERACY_TOL)
            .expect("nonempty spectrum");
        let mut v: Vec<Complex64> = (0..d).map(|i| dec.vectors[i * d + k]).collect();
        canonicalize_phase(&mut v);
        Ok((dec.values[k], v))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Projection onto the PSD cone in Frobenius norm: negative eigenvalues
    /// are clipped to zero.
    pub fn psd_part(&self) -> Result<Self> {
        self.map_spectrum(|v| v.max(0.0))
    }

    fn jacobi(&self) -> Result<Decomposition> {
        jacobi_eigen(self.dim, &self.entries)
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianOperator({}x{}) [", self.dim, self.dim)?;
        for row in self.entries.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        HermitianOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        HermitianOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&HermitianOperator> for HermitianOperator {
    fn add_assign(&mut self, rhs: &HermitianOperator) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Free-function form of [`HermitianOperator::eigen`].
pub fn eigenvalues(h: &HermitianOperator) -> Result<Spectrum> {
    h.eigen()
}

pub fn operator_norm(h: &HermitianOperator) -> Result<f64> {
    h.operator_norm()
}

pub fn max_eigenvector(h: &HermitianOperator) -> Result<Vec<Complex64>> {
    h.max_eigenvector()
}

pub fn is_psd(h: &HermitianOperator, tol: f64) -> Result<bool> {
    h.is_psd(tol)
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Multiplies `v` by a global phase so that its first component with
/// modulus above 1e-12 is real and positive.
pub fn canonicalize_phase(v: &mut [Complex64]) {
    let scale = vector_norm(v).max(f64::MIN_POSITIVE);
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
        // kill the rounding residue on the leading component
        if let Some(first) = v.iter_mut().find(|z| z.norm() > 1e-12 * scale) {
            first.im = 0.0;
        }
    }
}

pub(crate) fn matmul(d: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

pub(crate) fn adjoint(d: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j].conj();
        }
    }
    out
}

/// Cyclic Jacobi on a Hermitian matrix given row-major.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation, so the
/// combined transform on the (p, q) plane is
///
/// ```text
/// J = [ c            s          ]
///     [ -s·e^{-iφ}   c·e^{-iφ}  ]      a_pq = |a_pq| e^{iφ}
/// ```
///
/// and `A ← J† A J`, `V ← V J`.
fn jacobi_eigen(d: usize, input: &[Complex64]) -> Result<Decomposition> {
    let mut a = input.to_vec();
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * total;

    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += a[i * d + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                // signum(0) is +1 for +0.0, which is the desired choice
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                // A ← A J (columns p, q)
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * jpp + akq * jqp;
                    a[k * d + q] = akp * jpq + akq * jqq;
                }
                // A ← J† A (rows p, q)
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * d + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * d + q] = ZERO;
                a[q * d + p] = ZERO;
                a[p * d + p].im = 0.0;
                a[q * d + q].im = 0.0;
                // V ← V J
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = vkp * jpp + vkq * jqp;
                    v[k * d + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps });
    }
    Ok(Decomposition {
        values: (0..d).map(|i| a[i * d + i].re).collect(),
        vectors: v,
    })
}
