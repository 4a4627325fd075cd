//! su(n) data: a basis orthonormal for `-tr(XY)`, structure constants,
//! adjoint matrices, the normalized invariant form, Casimir and dual Coxeter
//! checks.
//!
//! The normalized form is `<X,Y>_g = -tr(ad X ad Y) / (16 pi^2 h)`, which is
//! `-tr(XY) / (8 pi^2)` on su(n). Values carrying `1/pi^2` are returned as
//! the coefficient of `1/pi^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::Matrix;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("unsupported group su({0}); built in: su(2), su(3), su(4)")]
    Unsupported(usize),
    #[error("Casimir operator is not scalar (deviation {0:e})")]
    NotScalar(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn trace(m: &Matrix<C>) -> C {
    (0..m.rows()).map(|i| *m.get(i, i)).sum()
}

pub fn commutator(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    a.mul(b).sub(&b.mul(a))
}

pub fn adjoint_conj(m: &Matrix<C>) -> Matrix<C> {
    Matrix::from_fn(m.cols(), m.rows(), |i, j| m.get(j, i).conj())
}

/// `i lambda / sqrt 2` for the generalized Gell-Mann matrices `lambda`; orthonormal for `-tr(XY)`.
pub fn su_basis(n: usize) -> Vec<Matrix<C>> {
    let s = 1.0 / 2f64.sqrt();
    let mut basis = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = Matrix::zeros(n, n);
            sym.set(j, k, c(0.0, s));
            sym.set(k, j, c(0.0, s));
            basis.push(sym);
            let mut anti = Matrix::zeros(n, n);
            anti.set(j, k, c(s, 0.0));
            anti.set(k, j, c(-s, 0.0));
            basis.push(anti);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * s;
        let mut d = Matrix::zeros(n, n);
        for m in 0..l {
            d.set(m, m, c(0.0, norm));
        }
        d.set(l, l, c(0.0, -(l as f64) * norm));
        basis.push(d);
    }
    basis
}

/// Lie algebra given by structure constants `[X_a, X_b] = sum_c f[a][b][c] X_c`
/// in a basis orthonormal for `metric_scale * (-tr)`.
#[derive(Debug, Clone)]
pub struct LieData {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub rank: usize,
    pub dual_coxeter: usize,
    pub basis: Vec<Matrix<C>>,
    pub structure: Vec<Vec<Vec<f64>>>,
}

impl LieData {
    pub fn su(n: usize) -> Result<Self, LieError> {
        if !(2..=4).contains(&n) {
            return Err(LieError::Unsupported(n));
        }
        Ok(Self::su_unchecked(n))
    }

    /// su(n) for any `n >= 2`; used for the ambient su(n^2 - 1) in the Chern check.
    pub fn su_unchecked(n: usize) -> Self {
        let basis = su_basis(n);
        let dim = basis.len();
        let structure = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        let br = commutator(&basis[a], &basis[b]);
                        (0..dim).map(|k| -trace(&br.mul(&basis[k])).re).collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            name: format!("su{n}"),
            n,
            dim,
            rank: n - 1,
            dual_coxeter: n,
            basis,
            structure,
        }
    }

    pub fn element(&self, coeffs: &[f64]) -> Matrix<C> {
        let n = self.n;
        coeffs
            .iter()
            .zip(&self.basis)
            .fold(Matrix::zeros(n, n), |acc, (x, b)| acc.add(&b.scale(&c(*x, 0.0))))
    }

    pub fn coefficients(&self, x: &Matrix<C>) -> Vec<f64> {
        self.basis.iter().map(|b| -trace(&x.mul(b)).re).collect()
    }

    /// `(ad x)_{cb} = sum_a x_a f[a][b][c]`.
    pub fn adjoint_matrix(&self, x: &[f64]) -> Matrix<C> {
        Matrix::from_fn(self.dim, self.dim, |row, col| {
            let v: f64 = (0..self.dim).map(|a| x[a] * self.structure[a][col][row]).sum();
            c(v, 0.0)
        })
    }

    /// Matrix of `Ad_g` on the complexified algebra in the stored basis.
    pub fn group_adjoint(&self, g: &Matrix<C>) -> Matrix<C> {
        let ginv = adjoint_conj(g);
        let images: Vec<Matrix<C>> = self.basis.iter().map(|b| g.mul(b).mul(&ginv)).collect();
        Matrix::from_fn(self.dim, self.dim, |row, col| {
            c(-trace(&images[col].mul(&self.basis[row])).re, 0.0)
        })
    }

    /// `tr(ad x ad y)`.
    pub fn killing(&self, x: &[f64], y: &[f64]) -> f64 {
        trace(&self.adjoint_matrix(x).mul(&self.adjoint_matrix(y))).re
    }

    /// Coefficient of `1/pi^2` in `<x, y>_g = -tr(ad x ad y) / (16 pi^2 h)`.
    pub fn normalized_inner_pi2(&self, x: &[f64], y: &[f64]) -> f64 {
        -self.killing(x, y) / (16.0 * self.dual_coxeter as f64)
    }

    /// `<x, y>_g` as a number.
    pub fn normalized_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.normalized_inner_pi2(x, y) / (PI * PI)
    }

    /// `<x, y>_g` on complexified coefficient vectors (bilinear, no conjugation).
    pub fn normalized_bilinear(&self, x: &[C], y: &[C]) -> C {
        // In the -tr-orthonormal basis the form is -tr(XY)/(8 pi^2) = sum x_a y_a / (8 pi^2).
        x.iter().zip(y).map(|(a, b)| a * b).sum::<C>() / (8.0 * PI * PI)
    }

    pub fn random_coefficients(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    pub fn casimir_eigenvalue(&self, metric_scale: f64, tol: f64) -> Result<CasimirReport, LieError> {
        // Dual basis for metric_scale * (-tr): X^a = X_a / metric_scale.
        let mut sum = Matrix::<C>::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[a] = 1.0;
            let ad = self.adjoint_matrix(&e);
            sum = sum.add(&ad.mul(&ad).scale(&c(1.0 / metric_scale, 0.0)));
        }
        let neg = sum.neg();
        let value = trace(&neg).re / self.dim as f64;
        let deviation = neg.sub(&Matrix::identity(self.dim).scale(&c(value, 0.0))).max_abs();
        if deviation > tol * value.abs().max(1.0) {
            return Err(LieError::NotScalar(deviation));
        }
        // Highest root: theta(H) = h_1 - h_n on H = i diag(h); X_theta = i diag(1, 0, .., -1).
        let n = self.n;
        let mut x_theta = Matrix::<C>::zeros(n, n);
        x_theta.set(0, 0, c(0.0, 1.0));
        x_theta.set(n - 1, n - 1, c(0.0, -1.0));
        let theta_on_x = 2.0;
        let metric = metric_scale * -trace(&x_theta.mul(&x_theta)).re;
        let theta_norm = theta_on_x * theta_on_x / metric;
        Ok(CasimirReport {
            c_ad: value,
            theta_norm,
            ratio: value / theta_norm,
            scalar_deviation: deviation,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CasimirReport {
    pub c_ad: f64,
    /// `<theta, theta>` for the dual metric.
    pub theta_norm: f64,
    /// `C_ad / <theta, theta>`, the dual Coxeter number.
    pub ratio: f64,
    pub scalar_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub n: usize,
    pub trials: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

impl IdentityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
        })
    }
}

/// `|tr(ad X ad Y) - 2n tr(XY)|` over random pairs, relative to `max(1, |2n tr(XY)|)`.
pub fn dual_coxeter_identity_check(n: usize, trials: usize, seed: u64) -> Result<IdentityReport, LieError> {
    let l = LieData::su(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0_f64;
    for _ in 0..trials {
        let x = l.random_coefficients(&mut rng);
        let y = l.random_coefficients(&mut rng);
        let lhs = l.killing(&x, &y);
        let rhs = 2.0 * n as f64 * trace(&l.element(&x).mul(&l.element(&y))).re;
        max_dev = max_dev.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    Ok(IdentityReport {
        n,
        trials,
        max_deviation: max_dev,
        passed: max_dev < 1e-10,
    })
}

/// `sum_b -tr([A,[B,T_b]] T_b)` over a `-tr`-orthonormal basis `T_b` of su(N): `-tr(ad A ad B)` on su(N).
fn ambient_killing(ambient: &[Matrix<C>], a: &Matrix<C>, b: &Matrix<C>) -> f64 {
    ambient
        .iter()
        .map(|t| -trace(&commutator(a, &commutator(b, t)).mul(t)).re)
        .sum()
}

/// Pointwise `c_2(Ad X) = 2h c_2(X)` with `c_2(X) = <X, X>_g` and `c_2(Ad X)` taken with the
/// normalized form of su(N), `N = n^2 - 1`, computed from the su(N) adjoint action directly.
/// Also checks `-ch_2(Ad X) = c_2(Ad X)` with `ch_2(A) = tr(A^2) / (8 pi^2)` for real antisymmetric `A`.
pub fn chern_relation_check(n: usize, trials: usize, seed: u64) -> Result<IdentityReport, LieError> {
    let l = LieData::su(n)?;
    let big_n = l.dim;
    let ambient = su_basis(big_n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0_f64;
    for _ in 0..trials {
        let x = l.random_coefficients(&mut rng);
        let ad = l.adjoint_matrix(&x);
        let c2_x = l.normalized_inner_pi2(&x, &x);
        let c2_ad = -ambient_killing(&ambient, &ad, &ad) / (16.0 * big_n as f64);
        let ch2_ad = trace(&ad.mul(&ad)).re / 8.0;
        let rhs = 2.0 * l.dual_coxeter as f64 * c2_x;
        let scale = rhs.abs().max(1.0);
        max_dev = max_dev.max((c2_ad - rhs).abs() / scale).max((-ch2_ad - c2_ad).abs() / scale);
    }
    Ok(IdentityReport {
        n,
        trials,
        max_deviation: max_dev,
        passed: max_dev < 1e-10,
    })
}

/// Max of `|<[Z,X],Y> + <X,[Z,Y]>|` over random triples.
pub fn ad_invariance_deviation(l: &LieData, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0_f64;
    for _ in 0..trials {
        let (x, y, z) = (l.random_coefficients(&mut rng), l.random_coefficients(&mut rng), l.random_coefficients(&mut rng));
        let adz = l.adjoint_matrix(&z);
        let to_f = |v: Vec<C>| v.into_iter().map(|c| c.re).collect::<Vec<_>>();
        let zx = to_f(adz.mul_vec(&x.iter().map(|v| c(*v, 0.0)).collect::<Vec<_>>()));
        let zy = to_f(adz.mul_vec(&y.iter().map(|v| c(*v, 0.0)).collect::<Vec<_>>()));
        let dev = l.normalized_inner_pi2(&zx, &y) + l.normalized_inner_pi2(&x, &zy);
        max_dev = max_dev.max(dev.abs());
    }
    max_dev
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &Matrix<C>) -> Matrix<C> {
    let norm = m.max_abs() * m.rows() as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(&c(1.0 / 2f64.powi(squarings as i32), 0.0));
    let n = m.rows();
    let mut term = Matrix::<C>::identity(n);
    let mut sum = Matrix::<C>::identity(n);
    for k in 1..=20 {
        term = term.mul(&scaled).scale(&c(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

pub fn is_unitary(g: &Matrix<C>, tol: f64) -> bool {
    g.is_square() && adjoint_conj(g).mul(g).approx_eq(&Matrix::identity(g.rows()), tol)
}

pub fn lie_check_json(n: usize, trials: usize, seed: u64, tol: f64) -> Result<Value, LieError> {
    let l = LieData::su(n)?;
    let coxeter = dual_coxeter_identity_check(n, trials, seed)?;
    let casimir = l.casimir_eigenvalue(1.0, tol.max(1e-10))?;
    let chern = chern_relation_check(n, trials.min(10), seed)?;
    let invariance = ad_invariance_deviation(&l, trials, seed);
    Ok(json!({
        "version": 1,
        "group": l.name,
        "dim": l.dim,
        "rank": l.rank,
        "dual_coxeter": l.dual_coxeter,
        "dual_coxeter_identity": coxeter.to_json(),
        "identity_deviation": coxeter.max_deviation,
        "casimir": {
            "c_ad": casimir.c_ad,
            "theta_norm": casimir.theta_norm,
            "c_ad_over_theta_norm": casimir.ratio,
            "scalar_deviation": casimir.scalar_deviation,
        },
        "chern_relation": chern.to_json(),
        "ad_invariance_deviation": invariance,
        "passed": coxeter.passed && chern.passed && invariance < 1e-10,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        for n in 2..=4 {
            let b = su_basis(n);
            assert_eq!(b.len(), n * n - 1);
            for (i, x) in b.iter().enumerate() {
                assert!(trace(x).norm() < 1e-14);
                assert!(adjoint_conj(x).add(x).max_abs() < 1e-14, "anti-hermitian");
                for (j, y) in b.iter().enumerate() {
                    let g = -trace(&x.mul(y)).re;
                    assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_element_has_zero_adjoint() {
        let l = LieData::su(2).unwrap();
        assert_eq!(l.adjoint_matrix(&[0.0; 3]).max_abs(), 0.0);
    }

    #[test]
    fn su2_adjoint_is_rotation_generator() {
        let l = LieData::su(2).unwrap();
        for a in 0..3 {
            let mut e = vec![0.0; 3];
            e[a] = 1.0;
            let ad = l.adjoint_matrix(&e);
            assert!(ad.add(&ad.transpose()).max_abs() < 1e-14, "antisymmetric");
            // entries are 0 or +-sqrt 2 for this normalization
            for v in ad.entries() {
                assert!(v.norm() < 1e-14 || (v.norm() - 2f64.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ratio_four_on_diagonal_su2_element() {
        let l = LieData::su(2).unwrap();
        let x = l.element(&[0.0, 0.0, 1.0]);
        let coeffs = l.coefficients(&x);
        let k = l.killing(&coeffs, &coeffs);
        let t = trace(&x.mul(&x)).re;
        assert!((k / t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn casimir_values() {
        let l2 = LieData::su(2).unwrap();
        let c2 = l2.casimir_eigenvalue(1.0, 1e-10).unwrap();
        assert!((c2.c_ad - 4.0).abs() < 1e-12);
        assert!((c2.theta_norm - 2.0).abs() < 1e-12);
        let scaled = l2.casimir_eigenvalue(3.0, 1e-10).unwrap();
        assert!((scaled.c_ad - 4.0 / 3.0).abs() < 1e-12);
        assert!((scaled.ratio - 2.0).abs() < 1e-12);
        let l3 = LieData::su(3).unwrap();
        assert!((l3.casimir_eigenvalue(1.0, 1e-10).unwrap().ratio - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identities_hold() {
        for n in 2..=4 {
            assert!(dual_coxeter_identity_check(n, 20, 1).unwrap().passed);
        }
        assert!(chern_relation_check(2, 5, 2).unwrap().passed);
        assert!(ad_invariance_deviation(&LieData::su(3).unwrap(), 10, 3) < 1e-12);
    }

    #[test]
    fn group_adjoint_matches_exponential_of_ad() {
        let l = LieData::su(2).unwrap();
        let x = [0.3, -0.2, 0.5];
        let g = expm(&l.element(&x));
        assert!(is_unitary(&g, 1e-12));
        let lhs = l.group_adjoint(&g);
        let rhs = expm(&l.adjoint_matrix(&x));
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn unsupported_group() {
        assert_eq!(LieData::su(5).unwrap_err(), LieError::Unsupported(5));
    }
}
