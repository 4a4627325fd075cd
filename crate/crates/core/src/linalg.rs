//! Dense matrices over a [`Scalar`] field: row reduction, rank, kernel and
//! image bases, determinants and finite-order eigenphase extraction.
//!
//! Pivoting is fixed so results are reproducible: the first nonzero entry for
//! exact rationals, the entry of largest modulus for complex floats.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::phase::Phase;
use crate::scalar::{Scalar, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix does not have finite order {order} (deviation {deviation:e})")]
    NotFiniteOrder { order: u32, deviation: f64 },
    #[error("eigenvalue off the grid of {order}-th roots of unity: {detail}")]
    PhaseOffGrid { order: u32, detail: String },
    #[error("malformed matrix JSON: {0}")]
    Json(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

/// Result of [`Matrix::rank_kernel_image`]. Bases are stored as matrix columns.
#[derive(Debug, Clone)]
pub struct RankKernelImage<F> {
    pub rank: usize,
    pub kernel: Matrix<F>,
    pub image: Matrix<F>,
    /// Pivot columns of the row reduction; `image` consists of these columns.
    pub pivots: Vec<usize>,
}

impl<F: Scalar> Matrix<F> {
    pub fn new(rows: usize, cols: usize, data: Vec<F>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Builds a `rows x cols.len()` matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<F>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn diagonal(entries: &[F]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { F::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<F>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        self.map(|x| x.to_complex())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a.clone() * other.get(k, j).clone());
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(F::zero(), |acc, k| acc + self.get(i, k).clone() * v[k].clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() + other.get(i, j).clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() - other.get(i, j).clone()
        })
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.mul(self))
    }

    /// Horizontal concatenation; all blocks must have `rows` rows.
    pub fn hstack(rows: usize, blocks: &[&Self]) -> Self {
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, offset + j, b.get(i, j).clone());
                }
            }
            offset += b.cols;
        }
        out
    }

    /// Block diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j).clone());
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(a.rows + i, a.cols + j, b.get(i, j).clone());
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    /// Absolute threshold below which entries count as zero under relative tolerance `tol`.
    fn threshold(&self, tol: f64) -> f64 {
        tol * self.max_abs().max(1.0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        let t = tol.max(0.0);
        self.data.iter().all(|x| x.is_negligible(t))
    }

    /// Entrywise comparison with absolute threshold `tol * max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        let t = tol * self.max_abs().max(other.max_abs()).max(1.0);
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a.clone() - b.clone()).is_negligible(t))
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let thr = self.threshold(tol);
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let pick = if F::EXACT {
                (row..m.rows).find(|&r| !m.get(r, col).is_exact_zero())
            } else {
                let best = (row..m.rows)
                    .max_by(|&a, &b| m.get(a, col).abs_f64().total_cmp(&m.get(b, col).abs_f64()));
                best.filter(|&r| !m.get(r, col).is_negligible(thr))
            };
            let Some(p) = pick else {
                if !F::EXACT {
                    for r in row..m.rows {
                        m.set(r, col, F::zero());
                    }
                }
                continue;
            };
            m.swap_rows(row, p);
            let inv = F::one() / m.get(row, col).clone();
            for j in 0..m.cols {
                let v = m.get(row, j).clone() * inv.clone();
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_exact_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(r, j).clone() - factor.clone() * m.get(row, j).clone();
                    m.set(r, j, v);
                }
                m.set(r, col, F::zero());
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    pub fn rank_kernel_image(&self, tol: f64) -> RankKernelImage<F> {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let kernel_cols: Vec<Vec<F>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![F::zero(); self.cols];
                v[fc] = F::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, fc).clone();
                }
                v
            })
            .collect();
        RankKernelImage {
            rank: pivots.len(),
            kernel: Matrix::from_columns(self.cols, &kernel_cols),
            image: self.select_columns(&pivots),
            pivots,
        }
    }

    pub fn kernel(&self, tol: f64) -> Self {
        self.rank_kernel_image(tol).kernel
    }

    /// Determinant by Gaussian elimination with the fixed pivot rule.
    pub fn det(&self) -> Result<F, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = F::one();
        for col in 0..n {
            let pick = if F::EXACT {
                (col..n).find(|&r| !m.get(r, col).is_exact_zero())
            } else {
                (col..n)
                    .max_by(|&a, &b| m.get(a, col).abs_f64().total_cmp(&m.get(b, col).abs_f64()))
                    .filter(|&r| !m.get(r, col).is_exact_zero())
            };
            let Some(p) = pick else {
                return Ok(F::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                let factor = m.get(r, col).clone() / pivot.clone();
                if factor.is_exact_zero() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(r, j).clone() - factor.clone() * m.get(col, j).clone();
                    m.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self, tol: f64) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(Self::zeros(0, 0));
        }
        let aug = Self::hstack(n, &[self, &Self::identity(n)]);
        let (r, pivots) = aug.rref(tol);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
    }

    /// Coordinates `x` with `self * x = b`, when `b` lies in the column span.
    /// Columns of `self` are assumed independent.
    pub fn solve_in_span(&self, b: &[F], tol: f64) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let bcol = Matrix::from_columns(self.rows, &[b.to_vec()]);
        let aug = Self::hstack(self.rows, &[self, &bcol]);
        let (r, pivots) = aug.rref(tol);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![F::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        if !F::EXACT {
            let residual: Vec<F> = self
                .mul_vec(&x)
                .into_iter()
                .zip(b)
                .map(|(a, b)| a - b.clone())
                .collect();
            let scale = self.max_abs().max(b.iter().map(|v| v.abs_f64()).fold(0.0, f64::max)).max(1.0);
            if residual.iter().any(|v| !v.is_negligible(tol.max(DEFAULT_TOL) * 1e3 * scale)) {
                return None;
            }
        }
        Some(x)
    }

    /// Indices of the columns of `candidates` that extend the (independent)
    /// columns of `self` to a basis of their joint span, in pivot order.
    pub fn extending_columns(&self, candidates: &Self, tol: f64) -> Vec<usize> {
        let aug = Self::hstack(self.rows, &[self, candidates]);
        let (_, pivots) = aug.rref(tol);
        pivots
            .into_iter()
            .filter(|&p| p >= self.cols)
            .map(|p| p - self.cols)
            .collect()
    }

    /// Standard basis vectors completing the columns of `self` to a basis.
    pub fn complement(&self, tol: f64) -> Self {
        let id = Self::identity(self.rows);
        let idx = self.extending_columns(&id, tol);
        id.select_columns(&idx)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.data.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, LinalgError> {
        let rows = v["rows"]
            .as_u64()
            .ok_or_else(|| LinalgError::Json("missing rows".into()))? as usize;
        let cols = v["cols"]
            .as_u64()
            .ok_or_else(|| LinalgError::Json("missing cols".into()))? as usize;
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| LinalgError::Json("missing entries".into()))?;
        let data = entries
            .iter()
            .map(F::from_json)
            .collect::<Result<Vec<_>, _>>()
            .map_err(LinalgError::Json)?;
        Self::new(rows, cols, data)
    }
}

/// Whether a JSON matrix uses the exact rational encoding (`"p/q"` strings or integers).
pub fn json_matrix_is_rational(v: &Value) -> bool {
    v["entries"]
        .as_array()
        .map(|e| e.iter().all(|x| x.is_string() || x.is_i64()))
        .unwrap_or(false)
}

/// Eigenphases `theta_j = j/order` of a matrix with `m^order = I`.
///
/// Multiplicities come from the discrete Fourier transform of the traces
/// `tr(m^k)`, and each nonzero multiplicity is confirmed by the nullity of
/// `m - e^{2 pi i j/order}`.
pub fn eigenphases_finite_order(
    m: &Matrix<Complex64>,
    order: u32,
    tol: f64,
) -> Result<Vec<Phase>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if order == 0 {
        return Err(LinalgError::NotFiniteOrder {
            order,
            deviation: f64::INFINITY,
        });
    }
    let n = m.rows();
    let id = Matrix::<Complex64>::identity(n);
    let mut powers = Vec::with_capacity(order as usize);
    let mut p = id.clone();
    for _ in 0..order {
        powers.push(p.clone());
        p = p.mul(m);
    }
    let deviation = p.sub(&id).max_abs();
    if deviation > tol * m.max_abs().max(1.0).powi(order as i32) {
        return Err(LinalgError::NotFiniteOrder { order, deviation });
    }
    let traces: Vec<Complex64> = powers
        .iter()
        .map(|pk| (0..n).map(|i| *pk.get(i, i)).sum())
        .collect();
    let mut phases = Vec::with_capacity(n);
    let mut total = 0usize;
    for j in 0..order {
        let mult: Complex64 = traces
            .iter()
            .enumerate()
            .map(|(k, t)| {
                t * Complex64::from_polar(1.0, -2.0 * PI * (j as f64) * (k as f64) / order as f64)
            })
            .sum::<Complex64>()
            / order as f64;
        let rounded = mult.re.round();
        let slack = 1e-6_f64.max(tol * n as f64 * 10.0);
        if (mult.re - rounded).abs() > slack || mult.im.abs() > slack || rounded < 0.0 {
            return Err(LinalgError::PhaseOffGrid {
                order,
                detail: format!("multiplicity of phase {j}/{order} is {mult}"),
            });
        }
        let count = rounded as usize;
        if count > 0 {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / order as f64);
            let shifted = m.sub(&id.scale(&zeta));
            let nullity = n - shifted.rank(tol.max(1e-7));
            if nullity != count {
                return Err(LinalgError::PhaseOffGrid {
                    order,
                    detail: format!(
                        "phase {j}/{order}: trace multiplicity {count} but eigenspace dimension {nullity}"
                    ),
                });
            }
        }
        total += count;
        phases.extend(std::iter::repeat_n(Phase::new(j as i64, order as i64), count));
    }
    if total != n {
        return Err(LinalgError::PhaseOffGrid {
            order,
            detail: format!("multiplicities sum to {total}, expected {n}"),
        });
    }
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn rat(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| q(x, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_has_full_rank_and_empty_kernel() {
        let rki = Matrix::<Rational>::identity(2).rank_kernel_image(0.0);
        assert_eq!(rki.rank, 2);
        assert_eq!(rki.kernel.cols(), 0);
        assert_eq!(rki.image, Matrix::identity(2));
    }

    #[test]
    fn zero_matrix_kernel_is_standard_basis() {
        let rki = Matrix::<Rational>::zeros(2, 2).rank_kernel_image(0.0);
        assert_eq!(rki.rank, 0);
        assert_eq!(rki.kernel, Matrix::identity(2));
        assert_eq!(rki.image.cols(), 0);
    }

    #[test]
    fn rank_one_by_row_reduction() {
        let m = rat(vec![vec![1, 2], vec![2, 4]]);
        let rki = m.rank_kernel_image(0.0);
        assert_eq!(rki.rank, 1);
        // kernel vector (-2, 1)
        assert_eq!(rki.kernel.column(0), vec![q(-2, 1), q(1, 1)]);
        assert!(m.mul(&rki.kernel).is_zero(0.0));
    }

    #[test]
    fn empty_matrix_has_rank_zero() {
        assert_eq!(Matrix::<Rational>::zeros(0, 3).rank(0.0), 0);
        assert_eq!(Matrix::<Rational>::zeros(0, 3).kernel(0.0).cols(), 3);
    }

    #[test]
    fn determinants() {
        assert_eq!(Matrix::<Rational>::identity(3).det().unwrap(), q(1, 1));
        assert_eq!(rat(vec![vec![2, 0], vec![0, 3]]).det().unwrap(), q(6, 1));
        assert_eq!(rat(vec![vec![0, 1], vec![1, 0]]).det().unwrap(), q(-1, 1));
        assert_eq!(
            Matrix::<Rational>::zeros(2, 3).det(),
            Err(LinalgError::NonSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn solve_and_complement() {
        let a = rat(vec![vec![1], vec![1], vec![0]]);
        let x = a.solve_in_span(&[q(3, 1), q(3, 1), q(0, 1)], 0.0).unwrap();
        assert_eq!(x, vec![q(3, 1)]);
        assert!(a.solve_in_span(&[q(1, 1), q(0, 1), q(0, 1)], 0.0).is_none());
        let c = a.complement(0.0);
        assert_eq!(c.cols(), 2);
        assert_ne!(Matrix::hstack(3, &[&a, &c]).det().unwrap(), q(0, 1));
    }

    #[test]
    fn eigenphases_of_identity_and_minus_identity() {
        let id = Matrix::<Complex64>::identity(3);
        let ph = eigenphases_finite_order(&id, 1, DEFAULT_TOL).unwrap();
        assert!(ph.iter().all(|p| *p == Phase::new(0, 1)));
        let minus = id.neg().select_columns(&[0, 1]).transpose().select_columns(&[0, 1]);
        let ph = eigenphases_finite_order(&minus, 2, DEFAULT_TOL).unwrap();
        assert_eq!(ph, vec![Phase::new(1, 2), Phase::new(1, 2)]);
    }

    #[test]
    fn eigenphases_of_rotation_by_third_turn() {
        let (s, c) = (2.0 * PI / 3.0).sin_cos();
        let r = Matrix::from_rows(vec![
            vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
        .unwrap();
        let ph = eigenphases_finite_order(&r, 3, DEFAULT_TOL).unwrap();
        assert_eq!(ph, vec![Phase::new(1, 3), Phase::new(2, 3)]);
    }

    #[test]
    fn eigenphases_reject_wrong_order() {
        let r = Matrix::<Complex64>::identity(2).neg();
        assert!(matches!(
            eigenphases_finite_order(&r, 3, DEFAULT_TOL),
            Err(LinalgError::NotFiniteOrder { .. })
        ));
    }

    #[test]
    fn json_round_trip_complex() {
        let m = Matrix::from_rows(vec![vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]])
            .unwrap();
        let back = Matrix::<Complex64>::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
        assert!(!json_matrix_is_rational(&m.to_json()));
        assert!(json_matrix_is_rational(&rat(vec![vec![1]]).to_json()));
    }
}
