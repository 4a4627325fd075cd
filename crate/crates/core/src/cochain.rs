//! Finite cochain complexes with orthonormal cell bases, their cohomology,
//! and Reidemeister torsion as a positive scalar.
//!
//! Torsion convention: with `s^j` spanning a complement of `ker d_j` and
//! cocycle lifts `h^j`, let `M_j = [d s^{j-1} | s^j | h^j]` in cell
//! coordinates (or relative to a supplied volume basis `V_j`). Then
//! `tau = prod_j |det M_j / det V_j|^{(-1)^j}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::scalar::{Magnitude, Scalar};

pub const TORSION_CONVENTION: &str =
    "tau = prod_j |det[d s^(j-1) | s^j | h^j]|^((-1)^j), cells orthonormal";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CochainError {
    #[error("not a complex: d_{} d_{} != 0 (max entry {deviation:e})", .degree + 1, .degree)]
    NotAComplex { degree: usize, deviation: f64 },
    #[error("degenerate choice in degree {degree}: assembled matrix is singular")]
    DegenerateChoice { degree: usize },
    #[error("cohomology data inconsistent with the complex in degree {degree}: {reason}")]
    InconsistentCohomology { degree: usize, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Cochain complex `C^0 -> C^1 -> ... -> C^n`; `d[j]` maps `C^j` to `C^{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CochainComplex<F> {
    dims: Vec<usize>,
    d: Vec<Matrix<F>>,
}

impl<F: Scalar> CochainComplex<F> {
    /// Validates shapes and `d_{j+1} d_j = 0` (exactly, or within `tol` relative).
    pub fn new(dims: Vec<usize>, d: Vec<Matrix<F>>, tol: f64) -> Result<Self, CochainError> {
        if dims.is_empty() {
            return Err(CochainError::DimensionMismatch("complex needs at least one degree".into()));
        }
        if d.len() + 1 != dims.len() {
            return Err(CochainError::DimensionMismatch(format!(
                "{} degrees need {} differentials, got {}",
                dims.len(),
                dims.len() - 1,
                d.len()
            )));
        }
        for (j, m) in d.iter().enumerate() {
            if m.rows() != dims[j + 1] || m.cols() != dims[j] {
                return Err(CochainError::DimensionMismatch(format!(
                    "d_{j} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    dims[j + 1],
                    dims[j]
                )));
            }
        }
        for j in 0..d.len().saturating_sub(1) {
            let dd = d[j + 1].mul(&d[j]);
            let scale = d[j + 1].max_abs().max(1.0) * d[j].max_abs().max(1.0);
            if !dd.is_zero(tol * scale) {
                return Err(CochainError::NotAComplex {
                    degree: j,
                    deviation: dd.max_abs(),
                });
            }
        }
        Ok(Self { dims, d })
    }

    /// Complex with zero differentials.
    pub fn zero_differentials(dims: Vec<usize>) -> Self {
        let d = (0..dims.len().saturating_sub(1))
            .map(|j| Matrix::zeros(dims[j + 1], dims[j]))
            .collect();
        Self { dims, d }
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn num_degrees(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims.get(j).copied().unwrap_or(0)
    }

    /// `d_j : C^j -> C^{j+1}`, with zero maps outside the stored range.
    pub fn d(&self, j: usize) -> Matrix<F> {
        match self.d.get(j) {
            Some(m) => m.clone(),
            None => Matrix::zeros(self.dim(j + 1), self.dim(j)),
        }
    }

    /// `d_{j-1} : C^{j-1} -> C^j`; the zero map out of `C^{-1} = 0` for `j = 0`.
    pub fn d_into(&self, j: usize) -> Matrix<F> {
        if j == 0 {
            Matrix::zeros(self.dim(0), 0)
        } else {
            self.d(j - 1)
        }
    }

    pub fn differentials(&self) -> &[Matrix<F>] {
        &self.d
    }

    /// Appends zero-dimensional degrees up to `num_degrees` in total.
    pub fn padded(&self, num_degrees: usize) -> Self {
        let mut dims = self.dims.clone();
        let mut d = self.d.clone();
        while dims.len() < num_degrees {
            d.push(Matrix::zeros(0, *dims.last().unwrap()));
            dims.push(0);
        }
        Self { dims, d }
    }

    /// `C[-1]`: degree `j` holds `C^{j-1}`, differential `-d`.
    pub fn shifted(&self) -> Self {
        let mut dims = vec![0];
        dims.extend(&self.dims);
        let mut d = vec![Matrix::zeros(self.dims[0], 0)];
        d.extend(self.d.iter().map(Matrix::neg));
        Self { dims, d }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.num_degrees().max(other.num_degrees());
        let (a, b) = (self.padded(n), other.padded(n));
        let dims = (0..n).map(|j| a.dims[j] + b.dims[j]).collect();
        let d = (0..n - 1).map(|j| Matrix::block_diag(&a.d[j], &b.d[j])).collect();
        Self { dims, d }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "dims": self.dims,
            "differentials": self.d.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, tol: f64) -> Result<Self, CochainError> {
        let dims: Vec<usize> = v["dims"]
            .as_array()
            .ok_or_else(|| CochainError::DimensionMismatch("missing dims".into()))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| CochainError::DimensionMismatch("dims must be non-negative integers".into()))?;
        let d = v["differentials"]
            .as_array()
            .ok_or_else(|| CochainError::DimensionMismatch("missing differentials".into()))?
            .iter()
            .map(Matrix::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dims, d, tol)
    }
}

/// Chosen cohomology basis: column `k` of `lifts[j]` is a cocycle lifting the `k`-th basis class of `H^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyData<F> {
    pub lifts: Vec<Matrix<F>>,
}

impl<F: Scalar> CohomologyData<F> {
    pub fn dims(&self) -> Vec<usize> {
        self.lifts.iter().map(Matrix::cols).collect()
    }

    pub fn dim(&self, j: usize) -> usize {
        self.lifts.get(j).map_or(0, Matrix::cols)
    }

    pub fn is_acyclic(&self) -> bool {
        self.lifts.iter().all(|l| l.cols() == 0)
    }

    /// Basis change `h^j -> h^j * m_j` for each degree.
    pub fn transformed(&self, m: &[Matrix<F>]) -> Self {
        Self {
            lifts: self.lifts.iter().zip(m).map(|(l, mj)| l.mul(mj)).collect(),
        }
    }

    /// Lifts for `C[-1]`: degree `j` uses the lifts of degree `j-1`.
    pub fn shifted(&self) -> Self {
        let mut lifts = vec![Matrix::zeros(0, 0)];
        lifts.extend(self.lifts.iter().cloned());
        Self { lifts }
    }

    pub fn padded(&self, num_degrees: usize) -> Self {
        let mut lifts = self.lifts.clone();
        while lifts.len() < num_degrees {
            lifts.push(Matrix::zeros(0, 0));
        }
        Self { lifts }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "lifts": self.lifts.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CochainError> {
        let lifts = v["lifts"]
            .as_array()
            .ok_or_else(|| CochainError::DimensionMismatch("missing lifts".into()))?
            .iter()
            .map(Matrix::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { lifts })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorsionValue<M> {
    pub value: M,
    pub degree_convention: String,
}

impl<M: Magnitude> TorsionValue<M> {
    pub fn new(value: M, degree_convention: impl Into<String>) -> Self {
        Self {
            value,
            degree_convention: degree_convention.into(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_json(),
            "value_f64": self.value.to_f64(),
            "degree_convention": self.degree_convention,
        })
    }
}

/// Cohomology with the pivot-rule basis: kernel vectors of `d_j` extending an image basis of `d_{j-1}`.
pub fn cohomology<F: Scalar>(c: &CochainComplex<F>, tol: f64) -> CohomologyData<F> {
    let lifts = (0..c.num_degrees())
        .map(|j| {
            let kernel = c.d(j).kernel(tol);
            let boundaries = c.d_into(j).rank_kernel_image(tol).image;
            let idx = boundaries.extending_columns(&kernel, tol);
            kernel.select_columns(&idx)
        })
        .collect();
    CohomologyData { lifts }
}

/// Betti numbers `dim ker d_j - rank d_{j-1}`.
pub fn betti_numbers<F: Scalar>(c: &CochainComplex<F>, tol: f64) -> Vec<usize> {
    let ranks: Vec<usize> = (0..c.num_degrees()).map(|j| c.d(j).rank(tol)).collect();
    (0..c.num_degrees())
        .map(|j| c.dim(j) - ranks[j] - if j == 0 { 0 } else { ranks[j - 1] })
        .collect()
}

/// Checks that the lifts are cocycles that project to a basis of cohomology.
pub fn validate_cohomology<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    tol: f64,
) -> Result<(), CochainError> {
    if h.lifts.len() != c.num_degrees() {
        return Err(CochainError::DimensionMismatch(format!(
            "cohomology data has {} degrees, complex has {}",
            h.lifts.len(),
            c.num_degrees()
        )));
    }
    let betti = betti_numbers(c, tol);
    for (j, l) in h.lifts.iter().enumerate() {
        if l.cols() > 0 && l.rows() != c.dim(j) {
            return Err(CochainError::InconsistentCohomology {
                degree: j,
                reason: format!("lifts have length {}, C^{j} has dimension {}", l.rows(), c.dim(j)),
            });
        }
        if l.cols() != betti[j] {
            return Err(CochainError::InconsistentCohomology {
                degree: j,
                reason: format!("{} lifts for dim H^{j} = {}", l.cols(), betti[j]),
            });
        }
        if l.cols() == 0 {
            continue;
        }
        let dl = c.d(j).mul(l);
        if !dl.is_zero(tol * c.d(j).max_abs().max(1.0) * l.max_abs().max(1.0)) {
            return Err(CochainError::InconsistentCohomology {
                degree: j,
                reason: "a lift is not a cocycle".into(),
            });
        }
        let boundaries = c.d_into(j).rank_kernel_image(tol).image;
        let joint = Matrix::hstack(c.dim(j), &[&boundaries, l]);
        if joint.rank(tol) != boundaries.cols() + l.cols() {
            return Err(CochainError::InconsistentCohomology {
                degree: j,
                reason: "lifts are dependent modulo coboundaries".into(),
            });
        }
    }
    Ok(())
}

/// Coordinates of the class of cocycle `z` in the basis `h^j`.
pub fn class_coordinates<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    j: usize,
    z: &[F],
    tol: f64,
) -> Result<Vec<F>, CochainError> {
    let boundaries = c.d_into(j).rank_kernel_image(tol).image;
    let nb = boundaries.cols();
    let lifts = h.lifts.get(j).cloned().unwrap_or_else(|| Matrix::zeros(c.dim(j), 0));
    let lifts = if lifts.cols() == 0 { Matrix::zeros(c.dim(j), 0) } else { lifts };
    let joint = Matrix::hstack(c.dim(j), &[&boundaries, &lifts]);
    let x = joint
        .solve_in_span(z, tol)
        .ok_or_else(|| CochainError::InconsistentCohomology {
            degree: j,
            reason: "vector is not a cocycle in the span of coboundaries and lifts".into(),
        })?;
    Ok(x[nb..].to_vec())
}

/// Matrix of class coordinates for each column of `zs`.
pub fn class_coordinate_matrix<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    j: usize,
    zs: &Matrix<F>,
    tol: f64,
) -> Result<Matrix<F>, CochainError> {
    let cols = zs
        .columns()
        .iter()
        .map(|z| class_coordinates(c, h, j, z, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_columns(h.dim(j), &cols))
}

/// Default `s^j`: standard vectors at the pivot columns of `d_j`.
pub fn default_sections<F: Scalar>(c: &CochainComplex<F>, tol: f64) -> Vec<Matrix<F>> {
    (0..c.num_degrees())
        .map(|j| {
            let pivots = c.d(j).rank_kernel_image(tol).pivots;
            Matrix::<F>::identity(c.dim(j)).select_columns(&pivots)
        })
        .collect()
}

pub fn torsion<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, CochainError> {
    validate_cohomology(c, h, tol)?;
    torsion_with_choices(c, h, &default_sections(c, tol), None, tol)
}

/// Torsion relative to volume bases `volumes[j]` (columns in cell coordinates) instead of the cells.
pub fn torsion_with_volume<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    volumes: &[Matrix<F>],
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, CochainError> {
    validate_cohomology(c, h, tol)?;
    torsion_with_choices(c, h, &default_sections(c, tol), Some(volumes), tol)
}

/// Torsion for explicit sections `s^j`; no validation of `h`.
pub fn torsion_with_choices<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    sections: &[Matrix<F>],
    volumes: Option<&[Matrix<F>]>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, CochainError> {
    let mut value = <F::Magnitude as Magnitude>::one();
    for j in 0..c.num_degrees() {
        let n = c.dim(j);
        let ds = if j == 0 {
            Matrix::zeros(n, 0)
        } else {
            c.d(j - 1).mul(&sections[j - 1])
        };
        let s = &sections[j];
        let hj = match h.lifts.get(j) {
            Some(l) if l.cols() > 0 => l.clone(),
            _ => Matrix::zeros(n, 0),
        };
        if ds.cols() + s.cols() + hj.cols() != n {
            return Err(CochainError::DimensionMismatch(format!(
                "degree {j}: {} + {} + {} columns for dimension {n}",
                ds.cols(),
                s.cols(),
                hj.cols()
            )));
        }
        let m = Matrix::hstack(n, &[&ds, s, &hj]);
        let mut det = m.det()?;
        if det.is_negligible(tol * m.max_abs().max(1.0).powi(n as i32)) {
            return Err(CochainError::DegenerateChoice { degree: j });
        }
        if let Some(vols) = volumes {
            let v = &vols[j];
            let dv = v.det()?;
            if dv.is_exact_zero() {
                return Err(CochainError::DegenerateChoice { degree: j });
            }
            det = det / dv;
        }
        value = value.mul(&det.magnitude().alternating(j));
    }
    Ok(TorsionValue::new(value, TORSION_CONVENTION))
}

#[derive(Debug, Clone)]
pub struct ChoiceIndependenceReport {
    pub trials: usize,
    pub baseline: f64,
    pub max_rel_deviation: f64,
    pub all_equal: bool,
}

impl ChoiceIndependenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "baseline": self.baseline,
            "max_rel_deviation": self.max_rel_deviation,
            "all_equal": self.all_equal,
        })
    }
}

fn random_matrix<F: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, range: i64) -> Matrix<F> {
    Matrix::from_fn(rows, cols, |_, _| F::from_i64(rng.gen_range(-range..=range)))
}

/// Random invertible integer matrix.
pub fn random_invertible<F: Scalar>(rng: &mut ChaCha8Rng, n: usize, range: i64) -> Matrix<F> {
    loop {
        let m = random_matrix::<F>(rng, n, n, range);
        if m.det().map(|d| d.abs_f64() > 0.5).unwrap_or(false) {
            return m;
        }
    }
}

/// Recomputes torsion with `trials` random sections `s^j G + K R` and lifts `h^j + d(anything)`.
pub fn torsion_choice_independence_check<F: Scalar>(
    c: &CochainComplex<F>,
    h: &CohomologyData<F>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<ChoiceIndependenceReport, CochainError> {
    let base = torsion(c, h, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let defaults = default_sections(c, tol);
    let mut max_dev = 0.0_f64;
    let mut all_equal = true;
    for _ in 0..trials {
        let sections: Vec<Matrix<F>> = (0..c.num_degrees())
            .map(|j| {
                let s = &defaults[j];
                let g = random_invertible::<F>(&mut rng, s.cols(), 3);
                let k = c.d(j).kernel(tol);
                let r = random_matrix::<F>(&mut rng, k.cols(), s.cols(), 3);
                s.mul(&g).add(&k.mul(&r))
            })
            .collect();
        let lifts = CohomologyData {
            lifts: (0..c.num_degrees())
                .map(|j| {
                    let l = &h.lifts[j];
                    if l.cols() == 0 || j == 0 {
                        return l.clone();
                    }
                    let r = random_matrix::<F>(&mut rng, c.dim(j - 1), l.cols(), 3);
                    l.add(&c.d(j - 1).mul(&r))
                })
                .collect(),
        };
        let t = torsion_with_choices(c, &lifts, &sections, None, tol)?;
        if t.value != base.value {
            all_equal = false;
        }
        max_dev = max_dev.max(t.value.rel_deviation(&base.value));
    }
    Ok(ChoiceIndependenceReport {
        trials,
        baseline: base.to_f64(),
        max_rel_deviation: max_dev,
        all_equal,
    })
}
