//! Analytic shortcuts: sharp pairs, dichotomic qubit pairs, noisy mutually
//! unbiased pairs and the `(μ, ν)` region functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::inner;
use crate::povm::{check_basis, norm3, QubitDichotomicParams};
use crate::tolerance::REGION_GUARD;

/// Overlaps `⟨φ_x|ψ_y⟩ = κ(x,y)·e^{iθ(x,y)}` between two orthonormal bases.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapData {
    pub kappa: Vec<Vec<f64>>,
    /// Phases in `[0, 2π)`; zero where `κ` vanishes.
    pub theta: Vec<Vec<f64>>,
}

impl OverlapData {
    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    pub fn overlap(&self, x: usize, y: usize) -> Complex64 {
        Complex64::from_polar(self.kappa[x][y], self.theta[x][y])
    }
}

pub fn overlaps(basis1: &[Vec<Complex64>], basis2: &[Vec<Complex64>]) -> Result<OverlapData> {
    let d = check_basis(basis1)?;
    let d2 = check_basis(basis2)?;
    if d != d2 {
        return Err(Error::DimMismatch { left: d, right: d2 });
    }
    let mut kappa = vec![vec![0.0; d]; d];
    let mut theta = vec![vec![0.0; d]; d];
    for (x, phi) in basis1.iter().enumerate() {
        for (y, psi) in basis2.iter().enumerate() {
            let z = inner(phi, psi);
            kappa[x][y] = z.norm();
            if z.norm() > 0.0 {
                theta[x][y] = z.arg().rem_euclid(2.0 * PI);
                // rem_euclid can round up to exactly 2π
                if theta[x][y] >= 2.0 * PI {
                    theta[x][y] = 0.0;
                }
            }
        }
    }
    Ok(OverlapData { kappa, theta })
}

/// Optimal success of the sharp pair of two bases, `(d² + Σκ)/(2d²)`, using
/// `‖M₁(x) + M₂(y)‖ = 1 + κ(x,y)`.
pub fn sharp_pair_success(basis1: &[Vec<Complex64>], basis2: &[Vec<Complex64>]) -> Result<f64> {
    let ov = overlaps(basis1, basis2)?;
    let d = ov.dim() as f64;
    let sum: f64 = ov.kappa.iter().flatten().sum();
    Ok((d * d + sum) / (2.0 * d * d))
}

fn sign_of(x: i8) -> Result<f64> {
    match x {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        other => Err(Error::InvalidParams(format!("outcome must be +1 or -1, got {other}"))),
    }
}

/// `‖M_{α,a}(x) + M_{β,b}(y)‖ = 1 + ½‖x·a + y·b‖ + ½(αx + βy)`.
pub fn qubit_pair_norm(first: QubitDichotomicParams, second: QubitDichotomicParams, x: i8, y: i8) -> Result<f64> {
    first.check()?;
    second.check()?;
    let (sx, sy) = (sign_of(x)?, sign_of(y)?);
    let v = [0, 1, 2].map(|k| sx * first.a[k] + sy * second.a[k]);
    Ok(1.0 + 0.5 * norm3(v) + 0.5 * (first.alpha * sx + second.alpha * sy))
}

/// `½ + ⅛(‖a + b‖ + ‖a − b‖)`; the biases drop out.
pub fn qubit_pair_success(first: QubitDichotomicParams, second: QubitDichotomicParams) -> Result<f64> {
    first.check()?;
    second.check()?;
    Ok(0.5 + 0.125 * busch_sum(first.a, second.a))
}

/// `‖a + b‖ + ‖a − b‖`.
pub fn busch_sum(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3([a[0] + b[0], a[1] + b[1], a[2] + b[2]]) + norm3([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Incompatibility of the unbiased qubit measurements with Bloch vectors
/// `a`, `b`: `‖a + b‖ + ‖a − b‖ > 2`.
pub fn busch_incompatible(a: [f64; 3], b: [f64; 3]) -> Result<bool> {
    QubitDichotomicParams::unbiased(a)?;
    QubitDichotomicParams::unbiased(b)?;
    Ok(busch_sum(a, b) > 2.0 + 1e-12)
}

fn check_mu_args(d: usize, mu: f64, nu: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    for x in [mu, nu] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::NoiseOutOfRange(x));
        }
    }
    Ok(())
}

/// `‖Q_μ(x) + P_ν(y)‖` for the noisy mutually unbiased pair; the same for
/// every cell.
pub fn noisy_mu_norm(d: usize, mu: f64, nu: f64) -> Result<f64> {
    check_mu_args(d, mu, nu)?;
    let df = d as f64;
    let rad = (mu * mu + nu * nu - 2.0 * (df - 2.0) * mu * nu / df).max(0.0);
    Ok(2.0 / df + (df - 2.0) * (mu + nu) / (2.0 * df) + 0.5 * rad.sqrt())
}

/// `f_d(μ,ν) = (d−2)(μ+ν−μν) + μ² + ν²`; the pair is useful iff `f_d > d−1`.
pub fn f(d: usize, mu: f64, nu: f64) -> f64 {
    let df = d as f64;
    (df - 2.0) * (mu + nu - mu * nu) + mu * mu + nu * nu
}

/// `g_d(μ,ν) = 2(d−2)(μ+ν−μν) − d(μ²+ν²) + 3`; for `μ+ν > 1` the pair is
/// incompatible iff `g_d < d−1`.
pub fn g(d: usize, mu: f64, nu: f64) -> f64 {
    let df = d as f64;
    2.0 * (df - 2.0) * (mu + nu - mu * nu) - df * (mu * mu + nu * nu) + 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionClass {
    UsefulForQrac,
    IncompatibleNotUseful,
    CompatibleOrUndetermined,
}

impl RegionClass {
    /// Short tag used in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            RegionClass::UsefulForQrac => "useful",
            RegionClass::IncompatibleNotUseful => "gap",
            RegionClass::CompatibleOrUndetermined => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSample {
    pub mu: f64,
    pub nu: f64,
    pub f_value: f64,
    pub g_value: f64,
    pub classification: RegionClass,
}

pub fn is_useful_region(d: usize, f_value: f64, guard: f64) -> bool {
    f_value > (d as f64 - 1.0) + guard
}

pub fn is_incompatible_region(d: usize, mu: f64, nu: f64, g_value: f64, guard: f64) -> bool {
    mu + nu > 1.0 + guard && g_value < (d as f64 - 1.0) - guard
}

pub fn classify_region(d: usize, mu: f64, nu: f64) -> RegionSample {
    classify_region_with(d, mu, nu, REGION_GUARD)
}

/// Tri-state classification; values within `guard` of a threshold fall into
/// [`RegionClass::CompatibleOrUndetermined`] unless the other criterion
/// decides them.
pub fn classify_region_with(d: usize, mu: f64, nu: f64, guard: f64) -> RegionSample {
    let f_value = f(d, mu, nu);
    let g_value = g(d, mu, nu);
    let classification = if is_useful_region(d, f_value, guard) {
        RegionClass::UsefulForQrac
    } else if is_incompatible_region(d, mu, nu, g_value, guard) {
        RegionClass::IncompatibleNotUseful
    } else {
        RegionClass::CompatibleOrUndetermined
    };
    RegionSample {
        mu,
        nu,
        f_value,
        g_value,
        classification,
    }
}

/// Open interval of `μ = ν` on which noisy mutually unbiased pairs are
/// incompatible but not useful:
/// `((√d+2)/(2(√d+1)), (√d+1)/(√d+2))`.
pub fn gap_interval(d: usize) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(Error::NoGap(d));
    }
    let s = (d as f64).sqrt();
    Ok(((s + 2.0) / (2.0 * (s + 1.0)), (s + 1.0) / (s + 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::HermitianOperator;
    use crate::povm::{
        fourier_basis, mu_fourier_basis, noisy_mu_pair, qubit_dichotomic, sharp_from_basis, standard_basis,
    };
    use crate::qrac::{optimal_success, usefulness_2d};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn qp(alpha: f64, a: [f64; 3]) -> QubitDichotomicParams {
        QubitDichotomicParams::new(alpha, a).unwrap()
    }

    #[test]
    fn overlaps_equal_bases() {
        let b = fourier_basis(3);
        let ov = overlaps(&b, &b).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ov.kappa[x][y], expect, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(ov.theta[x][x], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlaps_mu_and_permuted() {
        for d in 2..6 {
            let (a, b) = mu_fourier_basis(d).unwrap();
            let ov = overlaps(&a, &b).unwrap();
            for x in 0..d {
                let row: f64 = ov.kappa[x].iter().map(|k| k * k).sum();
                assert_abs_diff_eq!(row, 1.0, epsilon = 1e-10);
                for y in 0..d {
                    assert_abs_diff_eq!(ov.kappa[x][y], 1.0 / (d as f64).sqrt(), epsilon = 1e-12);
                    assert!((0.0..2.0 * PI).contains(&ov.theta[x][y]));
                    assert!((ov.overlap(x, y) - inner(&a[x], &b[y])).norm() < 1e-12);
                }
            }
        }
        let a = standard_basis(3);
        let b = vec![a[2].clone(), a[0].clone(), a[1].clone()];
        let ov = overlaps(&a, &b).unwrap();
        assert_eq!(ov.kappa, vec![vec![0., 1., 0.], vec![0., 0., 1.], vec![1., 0., 0.]]);
    }

    #[test]
    fn sharp_pair_success_cases() {
        let b = fourier_basis(3);
        assert_abs_diff_eq!(sharp_pair_success(&b, &b).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        let (a, b) = mu_fourier_basis(2).unwrap();
        assert_abs_diff_eq!(sharp_pair_success(&a, &b).unwrap(), 0.8535533905932737, epsilon = 1e-12);
        let (a, b) = mu_fourier_basis(3).unwrap();
        let v = sharp_pair_success(&a, &b).unwrap();
        assert_abs_diff_eq!(v, 0.5 * (1.0 + 1.0 / 3f64.sqrt()), epsilon = 1e-12);
        let eig = optimal_success(&sharp_from_basis(&a).unwrap(), &sharp_from_basis(&b).unwrap())
            .unwrap()
            .p_bar;
        assert_abs_diff_eq!(v, eig, epsilon = 1e-10);
    }

    #[test]
    fn sharp_pair_eigenvectors_follow_overlap_phase() {
        // leading eigenvector of |φ_x⟩⟨φ_x| + |ψ_y⟩⟨ψ_y| is ∝ ψ_y + e^{iθ}φ_x
        let (a, b) = mu_fourier_basis(3).unwrap();
        let ov = overlaps(&a, &b).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let h = &HermitianOperator::outer(&a[x]) + &HermitianOperator::outer(&b[y]);
                let v = h.max_eigenvector().unwrap();
                let phase = Complex64::from_polar(1.0, ov.theta[x][y]);
                let w: Vec<Complex64> = b[y].iter().zip(&a[x]).map(|(p, f)| p + phase * f).collect();
                let fidelity = inner(&v, &w).norm() / crate::hermitian::vector_norm(&w);
                assert_abs_diff_eq!(fidelity, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn qubit_pair_norm_cases() {
        let zero = qp(0.0, [0.0; 3]);
        for (x, y) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            assert_eq!(qubit_pair_norm(zero, zero, x, y).unwrap(), 1.0);
        }
        let v = qubit_pair_norm(qp(0.0, [1., 0., 0.]), qp(0.0, [0., 1., 0.]), 1, 1).unwrap();
        assert_abs_diff_eq!(v, 1.0 + S2, epsilon = 1e-15);
        let v = qubit_pair_norm(qp(0.2, [0.0; 3]), zero, 1, 1).unwrap();
        assert_abs_diff_eq!(v, 1.1, epsilon = 1e-15);
        assert!(qubit_pair_norm(zero, zero, 0, 1).is_err());
    }

    #[test]
    fn qubit_pair_success_cases() {
        let zero = qp(0.0, [0.0; 3]);
        assert_eq!(qubit_pair_success(zero, zero).unwrap(), 0.5);
        let v = qubit_pair_success(qp(0.0, [1., 0., 0.]), qp(0.0, [0., 1., 0.])).unwrap();
        assert_abs_diff_eq!(v, 0.8535533905932737, epsilon = 1e-15);
        let v = qubit_pair_success(qp(0.0, [0.7, 0., 0.]), qp(0.2, [0., 0.7, 0.])).unwrap();
        assert_abs_diff_eq!(v, 0.5 + 0.125 * 2.0 * 0.7 * 2f64.sqrt(), epsilon = 1e-15);
        assert!(v < 0.75);
    }

    #[test]
    fn qubit_formulas_match_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draw = |rng: &mut ChaCha8Rng| {
            let r: f64 = rng.gen_range(0.0..1.0);
            let dir = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = norm3(dir).max(1e-9);
            let a = dir.map(|x| x * r / n);
            let alpha = rng.gen_range(-1.0..1.0) * (1.0 - norm3(a));
            qp(alpha, a)
        };
        for _ in 0..200 {
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let (m1, m2) = (qubit_dichotomic(p).unwrap(), qubit_dichotomic(q).unwrap());
            for (i, x) in [1i8, -1].into_iter().enumerate() {
                for (j, y) in [1i8, -1].into_iter().enumerate() {
                    let eig = (m1.effect(i) + m2.effect(j)).operator_norm().unwrap();
                    assert_abs_diff_eq!(qubit_pair_norm(p, q, x, y).unwrap(), eig, epsilon = 1e-12);
                }
            }
            let eig = optimal_success(&m1, &m2).unwrap().p_bar;
            assert_abs_diff_eq!(qubit_pair_success(p, q).unwrap(), eig, epsilon = 1e-10);
        }
    }

    #[test]
    fn busch_cases() {
        assert!(busch_incompatible([1., 0., 0.], [0., 1., 0.]).unwrap());
        assert!(!busch_incompatible([1., 0., 0.], [1., 0., 0.]).unwrap());
        assert!(!busch_incompatible([0.7, 0., 0.], [0., 0.7, 0.]).unwrap());
        assert!(busch_incompatible([1.2, 0., 0.], [0., 0.7, 0.]).is_err());
    }

    #[test]
    fn busch_agrees_with_usefulness() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = [
                rng.gen_range(-0.57..0.57),
                rng.gen_range(-0.57..0.57),
                rng.gen_range(-0.57..0.57),
            ];
            let b = [
                rng.gen_range(-0.57..0.57),
                rng.gen_range(-0.57..0.57),
                rng.gen_range(-0.57..0.57),
            ];
            if (busch_sum(a, b) - 2.0).abs() < 1e-8 {
                continue;
            }
            let m1 = qubit_dichotomic(qp(0.0, a)).unwrap();
            let m2 = qubit_dichotomic(qp(0.0, b)).unwrap();
            assert_eq!(
                busch_incompatible(a, b).unwrap(),
                usefulness_2d(&m1, &m2).unwrap().is_useful()
            );
        }
    }

    #[test]
    fn noisy_mu_norm_cases() {
        assert_abs_diff_eq!(noisy_mu_norm(2, 1.0, 1.0).unwrap(), 1.0 + S2, epsilon = 1e-15);
        for d in 2..8 {
            assert_abs_diff_eq!(noisy_mu_norm(d, 0.0, 0.0).unwrap(), 2.0 / d as f64, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(noisy_mu_norm(3, 1.0, 0.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(noisy_mu_norm(3, 1.5, 0.0), Err(Error::NoiseOutOfRange(_))));
        assert!(noisy_mu_norm(1, 0.5, 0.5).is_err());
    }

    #[test]
    fn noisy_mu_norm_matches_every_cell() {
        let (q, p) = noisy_mu_pair(4, 0.6, 0.9).unwrap();
        let expect = noisy_mu_norm(4, 0.6, 0.9).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let eig = (q.effect(x) + p.effect(y)).operator_norm().unwrap();
                assert_abs_diff_eq!(eig, expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn f_and_g_values() {
        assert_abs_diff_eq!(f(2, 0.3, 0.4), 0.25, epsilon = 1e-15);
        assert_eq!(f(2, 1.0, 1.0), 2.0);
        assert_eq!(g(2, 1.0, 1.0), -1.0);
        assert_abs_diff_eq!(f(3, 0.7, 0.7), 1.89, epsilon = 1e-12);
        assert_abs_diff_eq!(g(3, 0.7, 0.7), 1.88, epsilon = 1e-12);
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify_region(3, 1.0, 1.0).classification, RegionClass::UsefulForQrac);
        assert_eq!(
            classify_region(3, 0.7, 0.7).classification,
            RegionClass::IncompatibleNotUseful
        );
        for d in 2..12 {
            assert_eq!(
                classify_region(d, 0.3, 0.3).classification,
                RegionClass::CompatibleOrUndetermined
            );
        }
    }

    #[test]
    fn classification_agrees_with_usefulness_test() {
        // useful region ⟺ the constructed pair passes the usefulness test
        for d in 2..6 {
            for i in 0..=10 {
                for j in 0..=10 {
                    let (mu, nu) = (i as f64 / 10.0, j as f64 / 10.0);
                    let s = classify_region(d, mu, nu);
                    let (q, p) = noisy_mu_pair(d, mu, nu).unwrap();
                    let cert = usefulness_2d(&q, &p).unwrap();
                    if (s.f_value - (d as f64 - 1.0)).abs() < 1e-9 {
                        continue;
                    }
                    assert_eq!(
                        s.classification == RegionClass::UsefulForQrac,
                        cert.is_useful(),
                        "d={d} mu={mu} nu={nu}"
                    );
                }
            }
        }
    }

    #[test]
    fn gap_interval_cases() {
        let (lo, hi) = gap_interval(3).unwrap();
        assert_abs_diff_eq!(lo, 0.6830127018922193, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.7320508075688772, epsilon = 1e-12);
        let (lo, hi) = gap_interval(4).unwrap();
        assert_abs_diff_eq!(lo, 4.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.75, epsilon = 1e-15);
        let (lo, hi) = gap_interval(100).unwrap();
        assert_abs_diff_eq!(lo, 12.0 / 22.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 11.0 / 12.0, epsilon = 1e-15);
        assert!(matches!(gap_interval(2), Err(Error::NoGap(2))));
        for d in 3..40 {
            let (lo, hi) = gap_interval(d).unwrap();
            assert!(lo < hi);
            for k in 1..20 {
                let t = lo + (hi - lo) * k as f64 / 20.0;
                assert_eq!(
                    classify_region(d, t, t).classification,
                    RegionClass::IncompatibleNotUseful
                );
            }
        }
    }
}
