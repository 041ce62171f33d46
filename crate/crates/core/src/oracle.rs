//! Joint-measurement search by Dykstra alternating projections.
//!
//! The iteration alternates between the affine set of Hermitian grids whose
//! marginals are `(M₁, M₂)` and the product of PSD cones. A returned joint is
//! a compatibility certificate. [`Status::NoCertificate`] only means the
//! search gave up; it is not a proof of incompatibility.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::povm::{sum_operators, JointPovm, Povm};
use crate::tolerance::POVM_TOL;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 20_000;
/// The residual is recomputed every this many iterations.
const CHECK_EVERY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    JointFound,
    NoCertificate,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: Status,
    pub joint: Option<JointPovm>,
    /// Max of the marginal defect and the negativity of the candidate grid.
    pub residual: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn found(&self) -> bool {
        self.status == Status::JointFound
    }
}

/// Orthogonal projection (Frobenius norm) of an `n x m` grid onto the grids
/// with marginals `(M₁, M₂)`:
/// `G(x,y) += (M₁(x) − R(x))/m + (M₂(y) − C(y))/n − (Σ M₁ − T)/(nm)`
/// with row sums `R`, column sums `C` and total `T`.
pub fn project_marginals(cells: &[HermitianOperator], m1: &Povm, m2: &Povm) -> Result<Vec<HermitianOperator>> {
    let (n, m) = (m1.outcomes(), m2.outcomes());
    if cells.len() != n * m {
        return Err(Error::ShapeMismatch(format!(
            "grid has {} cells, expected {}",
            cells.len(),
            n * m
        )));
    }
    Ok(project(cells, m1.effects(), m2.effects()))
}

fn project(cells: &[HermitianOperator], m1: &[HermitianOperator], m2: &[HermitianOperator]) -> Vec<HermitianOperator> {
    let (n, m) = (m1.len(), m2.len());
    let rows: Vec<HermitianOperator> = (0..n).map(|x| sum_operators(&cells[x * m..(x + 1) * m])).collect();
    let cols: Vec<HermitianOperator> = (0..m)
        .map(|y| {
            let mut acc = HermitianOperator::zeros(cells[0].dim());
            for x in 0..n {
                acc += &cells[x * m + y];
            }
            acc
        })
        .collect();
    let total = sum_operators(&rows);
    let target_total = sum_operators(m1);
    let total_fix = (&target_total - &total).scale(1.0 / (n * m) as f64);
    let row_fix: Vec<HermitianOperator> = (0..n).map(|x| (&m1[x] - &rows[x]).scale(1.0 / m as f64)).collect();
    let col_fix: Vec<HermitianOperator> = (0..m).map(|y| (&m2[y] - &cols[y]).scale(1.0 / n as f64)).collect();
    let mut out = Vec::with_capacity(n * m);
    for x in 0..n {
        for y in 0..m {
            let mut g = &cells[x * m + y] + &row_fix[x];
            g += &col_fix[y];
            out.push(&g - &total_fix);
        }
    }
    out
}

fn marginal_defect(cells: &[HermitianOperator], m1: &[HermitianOperator], m2: &[HermitianOperator]) -> f64 {
    let (n, m) = (m1.len(), m2.len());
    let mut worst: f64 = 0.0;
    for x in 0..n {
        worst = worst.max(sum_operators(&cells[x * m..(x + 1) * m]).max_abs_diff(&m1[x]));
    }
    for y in 0..m {
        let mut acc = HermitianOperator::zeros(cells[0].dim());
        for x in 0..n {
            acc += &cells[x * m + y];
        }
        worst = worst.max(acc.max_abs_diff(&m2[y]));
    }
    worst
}

fn negativity(cells: &[HermitianOperator]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in cells {
        worst = worst.max(-c.min_eigenvalue()?);
    }
    Ok(worst)
}

pub fn find_joint(m1: &Povm, m2: &Povm) -> Result<FeasibilityResult> {
    find_joint_with(m1, m2, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn find_joint_with(m1: &Povm, m2: &Povm, tol: f64, max_iter: usize) -> Result<FeasibilityResult> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimMismatch {
            left: m1.dim(),
            right: m2.dim(),
        });
    }
    m1.ensure_valid(POVM_TOL)?;
    m2.ensure_valid(POVM_TOL)?;
    let (a, b) = (m1.effects(), m2.effects());
    let (n, m) = (a.len(), b.len());

    let mut x: Vec<HermitianOperator> = (0..n * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            (&a[i].scale(1.0 / m as f64) + &b[j].scale(1.0 / n as f64)).scale(0.5)
        })
        .collect();
    // only the cone step needs a Dykstra correction; the affine step is exact
    let mut q = vec![HermitianOperator::zeros(m1.dim()); n * m];
    let mut residual = f64::INFINITY;

    for it in 1..=max_iter {
        let y = project(&x, a, b);
        if it % CHECK_EVERY == 0 || it == max_iter || it == 1 {
            residual = marginal_defect(&y, a, b).max(negativity(&y)?);
            if residual <= tol {
                return Ok(FeasibilityResult {
                    status: Status::JointFound,
                    joint: Some(JointPovm::new(n, m, y)?),
                    residual,
                    iterations: it,
                });
            }
        }
        for k in 0..n * m {
            let z = &y[k] + &q[k];
            x[k] = z.psd_part()?;
            q[k] = &z - &x[k];
        }
    }
    Ok(FeasibilityResult {
        status: Status::NoCertificate,
        joint: None,
        residual,
        iterations: max_iter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointCheck {
    pub passed: bool,
    /// Largest entrywise deviation of either marginal.
    pub marginal_defect: f64,
    pub min_eigenvalue: f64,
    /// Spectral-norm deviation of `Σ G` from the identity.
    pub completeness_defect: f64,
}

/// Checks that `G` is a POVM within `tol` whose marginals match `(M₁, M₂)`
/// within `tol` entrywise.
pub fn verify_joint(g: &JointPovm, m1: &Povm, m2: &Povm, tol: f64) -> Result<JointCheck> {
    if g.shape() != (m1.outcomes(), m2.outcomes()) {
        return Err(Error::ShapeMismatch(format!(
            "joint grid {:?} does not match {}x{} outcomes",
            g.shape(),
            m1.outcomes(),
            m2.outcomes()
        )));
    }
    if g.dim() != m1.dim() || g.dim() != m2.dim() {
        return Err(Error::ShapeMismatch("joint and marginal dimensions differ".into()));
    }
    let marginal_defect = marginal_defect(g.effects(), m1.effects(), m2.effects());
    let report = g.validate_with(tol)?;
    let min_eigenvalue = report.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(JointCheck {
        passed: report.is_valid() && marginal_defect <= tol,
        marginal_defect,
        min_eigenvalue,
        completeness_defect: report.completeness_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::busch_sum;
    use crate::povm::{
        mu_fourier_basis, qubit_dichotomic, random_povm, sharp_from_basis, standard_basis, QubitDichotomicParams,
    };
    use crate::qrac::{generalized_bound, optimal_success};
    use nalgebra::DMatrix;

    fn unbiased(a: [f64; 3]) -> Povm {
        qubit_dichotomic(QubitDichotomicParams::unbiased(a).unwrap()).unwrap()
    }

    fn diagonal_povm(rows: &[&[f64]]) -> Povm {
        Povm::new(rows.iter().map(|r| HermitianOperator::diagonal(r)).collect()).unwrap()
    }

    #[test]
    fn affine_projection_matches_least_squares() {
        // per matrix entry the constraint is A g = b with A the (n+m) x nm
        // row/column summation map; compare with g − A⁺(A g − b)
        for (d, n, m, seed) in [(2, 2, 3, 1u64), (3, 3, 2, 2), (2, 4, 4, 3)] {
            let m1 = random_povm(d, n, seed).unwrap();
            let m2 = random_povm(d, m, seed + 10).unwrap();
            let cells: Vec<HermitianOperator> = random_povm(d, n * m, seed + 20)
                .unwrap()
                .effects()
                .iter()
                .map(|e| e.scale(1.7))
                .collect();
            let got = project_marginals(&cells, &m1, &m2).unwrap();

            let mut a = DMatrix::<f64>::zeros(n + m, n * m);
            for x in 0..n {
                for y in 0..m {
                    a[(x, x * m + y)] = 1.0;
                    a[(n + y, x * m + y)] = 1.0;
                }
            }
            let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
            for entry in 0..d * d {
                for part in 0..2 {
                    let pick = |h: &HermitianOperator| {
                        let z = h.entries()[entry];
                        if part == 0 {
                            z.re
                        } else {
                            z.im
                        }
                    };
                    let g = DMatrix::from_iterator(n * m, 1, cells.iter().map(pick));
                    let b = DMatrix::from_iterator(n + m, 1, m1.effects().iter().chain(m2.effects()).map(pick));
                    let proj = &g - &pinv * (&a * &g - b);
                    for k in 0..n * m {
                        assert!((proj[k] - pick(&got[k])).abs() < 1e-12);
                    }
                }
            }
            assert!(marginal_defect(&got, m1.effects(), m2.effects()) <= 1e-12);
        }
    }

    #[test]
    fn same_sharp_measurement() {
        let m = sharp_from_basis(&standard_basis(3)).unwrap();
        let r = find_joint(&m, &m).unwrap();
        assert!(r.found());
        assert!(r.residual <= 1e-8);
        assert!(verify_joint(r.joint.as_ref().unwrap(), &m, &m, 1e-7).unwrap().passed);
    }

    #[test]
    fn compatible_qubit_pair() {
        let (p, q) = (unbiased([0.5, 0., 0.]), unbiased([0., 0.5, 0.]));
        assert!(busch_sum([0.5, 0., 0.], [0., 0.5, 0.]) < 2.0);
        let r = find_joint(&p, &q).unwrap();
        assert!(r.found());
        let g = r.joint.unwrap();
        assert!(verify_joint(&g, &p, &q, 1e-7).unwrap().passed);
        let pb = optimal_success(&p, &q).unwrap().p_bar;
        assert!(pb <= generalized_bound(2, 2, 2) + 1e-9);
    }

    #[test]
    fn mu_qubit_pair_has_no_certificate() {
        let (a, b) = mu_fourier_basis(2).unwrap();
        let (p, q) = (sharp_from_basis(&a).unwrap(), sharp_from_basis(&b).unwrap());
        let r = find_joint_with(&p, &q, 1e-8, 2000).unwrap();
        assert_eq!(r.status, Status::NoCertificate);
        assert!(r.joint.is_none());
        assert!(r.residual > 1e-8);
        assert_eq!(r.iterations, 2000);
    }

    #[test]
    fn verify_examples() {
        let m = sharp_from_basis(&standard_basis(2)).unwrap();
        let g = JointPovm::new(
            2,
            2,
            vec![
                m.effect(0).clone(),
                HermitianOperator::zeros(2),
                HermitianOperator::zeros(2),
                m.effect(1).clone(),
            ],
        )
        .unwrap();
        assert!(verify_joint(&g, &m, &m, 1e-10).unwrap().passed);

        let flat = JointPovm::new(2, 2, vec![HermitianOperator::scaled_identity(2, 0.25); 4]).unwrap();
        let c = verify_joint(&flat, &m, &m, 1e-10).unwrap();
        assert!(!c.passed);
        assert!((c.marginal_defect - 0.5).abs() < 1e-15);
        assert!(c.completeness_defect < 1e-15);

        let three = sharp_from_basis(&standard_basis(3)).unwrap();
        assert!(matches!(
            verify_joint(&g, &three, &m, 1e-10),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn commuting_product_joint() {
        // G(x,y) = M₁(x)^{1/2} M₂(y) M₁(x)^{1/2} reduces to M₁(x)M₂(y) for
        // diagonal effects
        let m1 = diagonal_povm(&[&[0.7, 0.2], &[0.3, 0.8]]);
        let m2 = diagonal_povm(&[&[0.1, 0.5], &[0.6, 0.25], &[0.3, 0.25]]);
        let mut cells = Vec::new();
        for x in 0..2 {
            let root = m1.effect(x).map_spectrum(f64::sqrt).unwrap();
            for y in 0..3 {
                cells.push(m2.effect(y).sandwich(&root));
            }
        }
        let g = JointPovm::new(2, 3, cells).unwrap();
        assert!(verify_joint(&g, &m1, &m2, 1e-12).unwrap().passed);
    }

    #[test]
    fn dimension_mismatch() {
        let p = sharp_from_basis(&standard_basis(2)).unwrap();
        let q = sharp_from_basis(&standard_basis(3)).unwrap();
        assert!(matches!(find_joint(&p, &q), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn random_compatible_pairs() {
        for seed in 0..5 {
            let g = crate::povm::random_joint_povm(2, 2, 3, seed).unwrap();
            let (p, q) = crate::povm::marginals(&g).unwrap();
            let r = find_joint(&p, &q).unwrap();
            assert!(r.found(), "seed {seed} residual {}", r.residual);
            assert!(verify_joint(r.joint.as_ref().unwrap(), &p, &q, 1e-7).unwrap().passed);
        }
    }

    #[test]
    fn busch_boundary_sides() {
        for (a, b, compatible) in [
            ([0.66, 0., 0.], [0., 0.66, 0.], true),
            ([0.74, 0., 0.], [0., 0.74, 0.], false),
        ] {
            let r = find_joint(&unbiased(a), &unbiased(b)).unwrap();
            assert_eq!(r.found(), compatible, "{a:?} {b:?} residual {}", r.residual);
        }
    }
}
