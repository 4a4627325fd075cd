//! Cochain complexes of closed surfaces twisted by `Ad o rho`, built on the
//! one-vertex CW structure with relator `prod_i [x_i, y_i]`, together with the
//! symplectic form on `H^1`, the Poincare pairing and chain maps induced by
//! finite-order automorphisms.
//!
//! A 1-cochain is a tuple `(c_x1, c_y1, ..., c_xg, c_yg)` of vectors in the
//! complexified Lie algebra; it extends to words as a crossed homomorphism
//! `c(uv) = c(u) + Ad(rho(u)) c(v)`.

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cochain::{class_coordinate_matrix, cohomology, CochainComplex, CochainError, CohomologyData};
use crate::lie_algebra::{adjoint_conj, is_unitary, LieData, LieError};
use crate::linalg::{eigenphases_finite_order, LinalgError, Matrix};
use crate::mapping_torus::{ChainEndomorphism, TorusError};
use crate::phase::Phase;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("relator violated: |prod [rho(x_i), rho(y_i)] - 1| = {0:e}")]
    RelatorViolated(f64),
    #[error("generator {0} is not unitary")]
    NotUnitary(usize),
    #[error("symplectic form is degenerate: rank {rank} < dim H^1 = {dim}")]
    Degenerate { rank: usize, dim: usize },
    #[error("twisting incompatible: rho(gen {generator}) != g rho(phi(gen)) g^-1 (deviation {deviation:e})")]
    IncompatibleTwisting { generator: usize, deviation: f64 },
    #[error("substituted relator is not conjugate to the relator or its inverse")]
    RelatorNotPreserved,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad word {0:?}")]
    BadWord(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Letter `(generator index, +1 | -1)`; generators are ordered `x1, y1, x2, y2, ...`.
pub type Letter = (usize, i8);
pub type Word = Vec<Letter>;

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        match out.last() {
            Some(&(g, e)) if g == l.0 && e == -l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

pub fn surface_relator(genus: usize) -> Word {
    (0..genus)
        .flat_map(|i| [(2 * i, 1), (2 * i + 1, 1), (2 * i, -1), (2 * i + 1, -1)])
        .collect()
}

pub fn generator_name(k: usize) -> String {
    format!("{}{}", if k.is_multiple_of(2) { "x" } else { "y" }, k / 2 + 1)
}

/// Parses `"x1 y1^-1 x2"`.
pub fn parse_word(s: &str, genus: usize) -> Result<Word, SurfaceError> {
    s.split_whitespace()
        .map(|tok| {
            let (base, exp) = match tok.split_once('^') {
                Some((b, "-1")) => (b, -1),
                Some((b, "1")) => (b, 1),
                None => (tok, 1),
                _ => return Err(SurfaceError::BadWord(tok.into())),
            };
            let kind = match base.chars().next() {
                Some('x') => 0,
                Some('y') => 1,
                _ => return Err(SurfaceError::BadWord(tok.into())),
            };
            let idx: usize = base[1..].parse().map_err(|_| SurfaceError::BadWord(tok.into()))?;
            if idx == 0 || idx > genus {
                return Err(SurfaceError::BadWord(tok.into()));
            }
            Ok((2 * (idx - 1) + kind, exp))
        })
        .collect()
}

pub fn format_word(w: &[Letter]) -> String {
    w.iter()
        .map(|&(g, e)| if e < 0 { format!("{}^-1", generator_name(g)) } else { generator_name(g) })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `w` and `eps` with `u = w R^eps w^-1` in the free group, if any.
pub fn conjugator_to_relator(u: &[Letter], relator: &[Letter]) -> Option<(Word, i8)> {
    let mut v = free_reduce(u);
    let mut w: Word = Vec::new();
    while v.len() >= 2 {
        let (a, b) = (v[0], v[v.len() - 1]);
        if a.0 == b.0 && a.1 == -b.1 {
            w.push(a);
            v = v[1..v.len() - 1].to_vec();
        } else {
            break;
        }
    }
    for eps in [1i8, -1] {
        let r = if eps == 1 { relator.to_vec() } else { inverse_word(relator) };
        if r.len() != v.len() {
            continue;
        }
        for s in 0..r.len() {
            let rotated: Word = r[s..].iter().chain(&r[..s]).copied().collect();
            if rotated == v {
                // v = A^-1 R^eps A with A = r[..s]
                let a_inv = inverse_word(&r[..s]);
                let mut conj = w.clone();
                conj.extend(a_inv);
                return Some((free_reduce(&conj), eps));
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct SurfaceRepresentation {
    pub genus: usize,
    pub lie: LieData,
    pub generators: Vec<Matrix<C>>,
    ad: Vec<Matrix<C>>,
}

impl SurfaceRepresentation {
    pub fn new(genus: usize, lie: LieData, generators: Vec<Matrix<C>>, tol: f64) -> Result<Self, SurfaceError> {
        if genus == 0 || generators.len() != 2 * genus {
            return Err(SurfaceError::DimensionMismatch(format!(
                "genus {genus} needs {} generators, got {}",
                2 * genus,
                generators.len()
            )));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.rows() != lie.n || !is_unitary(g, tol.max(1e-12) * 10.0) {
                return Err(SurfaceError::NotUnitary(k));
            }
        }
        let ad = generators.iter().map(|g| lie.group_adjoint(g)).collect();
        let rep = Self { genus, lie, generators, ad };
        let r = rep.rho_word(&surface_relator(genus));
        let dev = r.sub(&Matrix::identity(rep.lie.n)).max_abs();
        if dev > tol.max(1e-12) * 100.0 {
            return Err(SurfaceError::RelatorViolated(dev));
        }
        Ok(rep)
    }

    pub fn trivial(genus: usize, lie: LieData) -> Self {
        let n = lie.n;
        let generators = vec![Matrix::identity(n); 2 * genus];
        Self::new(genus, lie, generators, 1e-12).expect("trivial representation")
    }

    pub fn coefficient_dim(&self) -> usize {
        self.lie.dim
    }

    pub fn relator(&self) -> Word {
        surface_relator(self.genus)
    }

    pub fn rho_word(&self, w: &[Letter]) -> Matrix<C> {
        w.iter().fold(Matrix::identity(self.lie.n), |acc, &(g, e)| {
            let m = if e > 0 { self.generators[g].clone() } else { adjoint_conj(&self.generators[g]) };
            acc.mul(&m)
        })
    }

    pub fn ad_word(&self, w: &[Letter]) -> Matrix<C> {
        w.iter().fold(Matrix::identity(self.lie.dim), |acc, &(g, e)| {
            let m = if e > 0 { self.ad[g].clone() } else { self.ad[g].transpose() };
            acc.mul(&m)
        })
    }

    /// Matrix `N x 2gN` evaluating a 1-cochain on the word `w` (Fox calculus).
    pub fn fox_row(&self, w: &[Letter]) -> Matrix<C> {
        let n = self.lie.dim;
        let mut out = Matrix::zeros(n, 2 * self.genus * n);
        let mut prefix = Matrix::identity(n);
        for &(g, e) in w {
            let block = if e > 0 {
                prefix.clone()
            } else {
                prefix.mul(&self.ad[g].transpose()).neg()
            };
            for r in 0..n {
                for k in 0..n {
                    let cur = *out.get(r, g * n + k);
                    out.set(r, g * n + k, cur + block.get(r, k));
                }
            }
            let step = if e > 0 { self.ad[g].clone() } else { self.ad[g].transpose() };
            prefix = prefix.mul(&step);
        }
        out
    }

    pub fn evaluate_cochain(&self, c: &[C], w: &[Letter]) -> Vec<C> {
        self.fox_row(w).mul_vec(c)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "genus": self.genus,
            "group": self.lie.name,
            "generators": self.generators.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, tol: f64) -> Result<Self, SurfaceError> {
        let genus = v["genus"].as_u64().ok_or_else(|| SurfaceError::DimensionMismatch("missing genus".into()))? as usize;
        let group = v["group"].as_str().unwrap_or("su2");
        let n: usize = group
            .strip_prefix("su")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SurfaceError::DimensionMismatch(format!("unknown group {group:?}")))?;
        let lie = LieData::su(n)?;
        let generators = v["generators"]
            .as_array()
            .ok_or_else(|| SurfaceError::DimensionMismatch("missing generators".into()))?
            .iter()
            .map(Matrix::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(genus, lie, generators, tol)
    }
}

/// `C^0 = g_C`, `C^1 = g_C^{2g}`, `C^2 = g_C`.
pub fn twisted_complex(rep: &SurfaceRepresentation, tol: f64) -> Result<CochainComplex<C>, SurfaceError> {
    let n = rep.lie.dim;
    let ident = Matrix::<C>::identity(n);
    let d0 = Matrix::from_fn(2 * rep.genus * n, n, |r, k| {
        let (g, row) = (r / n, r % n);
        *rep.ad[g].get(row, k) - *ident.get(row, k)
    });
    let d1 = rep.fox_row(&rep.relator());
    Ok(CochainComplex::new(vec![n, 2 * rep.genus * n, n], vec![d0, d1], tol)?)
}

/// Dimension of the commutant of the image of `rho` in `gl(n, C)`.
pub fn commutant_dimension(rep: &SurfaceRepresentation, tol: f64) -> usize {
    let n = rep.lie.n;
    let mut rows: Vec<Vec<C>> = Vec::new();
    for g in &rep.generators {
        // M g - g M = 0 as linear equations in the entries of M.
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![C::new(0.0, 0.0); n * n];
                for k in 0..n {
                    row[i * n + k] += *g.get(k, j);
                    row[k * n + j] -= *g.get(i, k);
                }
                rows.push(row);
            }
        }
    }
    let m = Matrix::from_rows(rows).expect("rectangular");
    n * n - m.rank(tol)
}

/// Cup product of 1-cocycles evaluated on the fundamental class and paired with `<.,.>_g`:
/// `sum_k <a(P_k), Ad(P_k) b(l_k)> + sum_{inverse letters x^-1} <a(x), b(x)>`.
pub fn cup_pairing(rep: &SurfaceRepresentation, a: &[C], b: &[C]) -> C {
    let r = rep.relator();
    let n = rep.lie.dim;
    let block = |c: &[C], g: usize| c[g * n..(g + 1) * n].to_vec();
    let mut total = C::new(0.0, 0.0);
    for k in 0..r.len() {
        let prefix = &r[..k];
        let a_p = rep.evaluate_cochain(a, prefix);
        let b_l = rep.evaluate_cochain(b, &r[k..=k]);
        let moved = rep.ad_word(prefix).mul_vec(&b_l);
        total += rep.lie.normalized_bilinear(&a_p, &moved);
        let (g, e) = r[k];
        if e < 0 {
            total += rep.lie.normalized_bilinear(&block(a, g), &block(b, g));
        }
    }
    total
}

/// Same class evaluated on the suffix representative of the fundamental cycle:
/// `sum_{k < N} <a(l_k), Ad(l_k) b(S_{k+1})> + sum_{inverse letters} <a(x), b(x)>`.
fn cup_pairing_suffix(rep: &SurfaceRepresentation, a: &[C], b: &[C]) -> C {
    let r = rep.relator();
    let n = rep.lie.dim;
    let block = |c: &[C], g: usize| c[g * n..(g + 1) * n].to_vec();
    let mut total = C::new(0.0, 0.0);
    for k in 0..r.len() {
        if k + 1 < r.len() {
            let a_l = rep.evaluate_cochain(a, &r[k..=k]);
            let b_s = rep.evaluate_cochain(b, &r[k + 1..]);
            let moved = rep.ad_word(&r[k..=k]).mul_vec(&b_s);
            total += rep.lie.normalized_bilinear(&a_l, &moved);
        }
        let (g, e) = r[k];
        if e < 0 {
            total += rep.lie.normalized_bilinear(&block(a, g), &block(b, g));
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct SymplecticPairing {
    /// `omega(h_i, h_j)` in the cohomology basis.
    pub matrix: Matrix<C>,
    pub basis: CohomologyData<C>,
    pub antisymmetry_deviation: f64,
}

impl SymplecticPairing {
    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "dim_h1": self.matrix.rows(),
            "omega": self.matrix.to_json(),
            "antisymmetry_deviation": self.antisymmetry_deviation,
        })
    }
}

fn lift_of(h: &CohomologyData<C>, coords: &[C]) -> Vec<C> {
    h.lifts[1].mul_vec(coords)
}

/// `omega(a, b) = -2 <a cup b>` on `H^1`.
pub fn symplectic_form(rep: &SurfaceRepresentation, tol: f64) -> Result<SymplecticPairing, SurfaceError> {
    let c = twisted_complex(rep, tol)?;
    let h = cohomology(&c, tol);
    symplectic_form_in_basis(rep, &h, tol)
}

pub fn symplectic_form_in_basis(
    rep: &SurfaceRepresentation,
    h: &CohomologyData<C>,
    tol: f64,
) -> Result<SymplecticPairing, SurfaceError> {
    let lifts = h.lifts[1].columns();
    let k = lifts.len();
    let mut m = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m.set(i, j, cup_pairing(rep, &lifts[i], &lifts[j]) * -2.0);
        }
    }
    let antisym = m.add(&m.transpose()).max_abs();
    let rank = m.rank(tol.max(1e-9));
    if rank < k {
        return Err(SurfaceError::Degenerate { rank, dim: k });
    }
    Ok(SymplecticPairing {
        matrix: m,
        basis: h.clone(),
        antisymmetry_deviation: antisym,
    })
}

/// `PD(a)(b) = 2 <a cup b>` for classes given by coordinates in the basis `h`, evaluated on
/// the suffix representative of the fundamental cycle.
pub fn poincare_pairing(
    rep: &SurfaceRepresentation,
    h: &CohomologyData<C>,
    a: &[C],
    b: &[C],
) -> Result<C, SurfaceError> {
    let k = h.dim(1);
    if a.len() != k || b.len() != k {
        return Err(SurfaceError::DimensionMismatch(format!(
            "classes need {k} coordinates, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(cup_pairing_suffix(rep, &lift_of(h, a), &lift_of(h, b)) * 2.0)
}

/// Pfaffian by expansion along the first row.
pub fn pfaffian(m: &Matrix<C>) -> C {
    let n = m.rows();
    if n == 0 {
        return C::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return C::new(0.0, 0.0);
    }
    let mut total = C::new(0.0, 0.0);
    for j in 1..n {
        let a = *m.get(0, j);
        if a.norm() == 0.0 {
            continue;
        }
        let rest: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor = Matrix::from_fn(n - 2, n - 2, |r, c| *m.get(rest[r], rest[c]));
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += a * sign * pfaffian(&minor);
    }
    total
}

/// Symplectic Gram-Schmidt: columns `S` with `S^T omega S = J = diag([[0,1],[-1,0]], ...)`.
pub fn symplectic_basis(omega: &Matrix<C>, tol: f64) -> Option<Matrix<C>> {
    let n = omega.rows();
    let form = |u: &[C], v: &[C]| -> C {
        let ov = omega.mul_vec(v);
        u.iter().zip(&ov).map(|(a, b)| a * b).sum()
    };
    let mut remaining: Vec<Vec<C>> = Matrix::<C>::identity(n).columns();
    let mut out: Vec<Vec<C>> = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let e = remaining.remove(0);
        let pos = remaining.iter().position(|f| form(&e, f).norm() > tol)?;
        let f = remaining.remove(pos);
        let w = form(&e, &f);
        let f: Vec<C> = f.iter().map(|x| x / w).collect();
        remaining = remaining
            .into_iter()
            .map(|v| {
                // v - omega(v, f) e + omega(v, e) f, which is omega-orthogonal to e and f
                let (vf, ve) = (form(&v, &f), form(&v, &e));
                v.iter()
                    .zip(e.iter().zip(&f))
                    .map(|(x, (a, b))| x - vf * a + ve * b)
                    .collect()
            })
            .collect();
        out.push(e);
        out.push(f);
    }
    Some(Matrix::from_columns(n, &out))
}

#[derive(Debug, Clone)]
pub struct OmegaPropertyReport {
    pub pfaffian: C,
    pub det: C,
    /// `Theta(vol^-1)(vol^-1)` with `Theta = PD = -omega` and `vol = omega^d / d!`.
    pub theta_value: C,
    /// `Pf(omega) det S` for a symplectic basis `S`; equals 1.
    pub symplectic_basis_check: C,
    pub passed: bool,
}

impl OmegaPropertyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pfaffian": [self.pfaffian.re, self.pfaffian.im],
            "det": [self.det.re, self.det.im],
            "theta_value": [self.theta_value.re, self.theta_value.im],
            "symplectic_basis_check": [self.symplectic_basis_check.re, self.symplectic_basis_check.im],
            "passed": self.passed,
        })
    }
}

pub fn omega_property(omega: &Matrix<C>, tol: f64) -> Result<OmegaPropertyReport, SurfaceError> {
    let pf = pfaffian(omega);
    let det = omega.neg().det()?;
    let theta_value = det / (pf * pf);
    let s = symplectic_basis(omega, tol.max(1e-12)).ok_or(SurfaceError::Degenerate {
        rank: omega.rank(tol.max(1e-9)),
        dim: omega.rows(),
    })?;
    let j = s.transpose().mul(omega).mul(&s);
    let pf_j = pfaffian(&j);
    let check = pf * s.det()? / pf_j;
    let one = C::new(1.0, 0.0);
    let passed = (theta_value - one).norm() < 1e-8 && (check - one).norm() < 1e-8;
    Ok(OmegaPropertyReport {
        pfaffian: pf,
        det,
        theta_value,
        symplectic_basis_check: check,
        passed,
    })
}

/// Automorphism `x -> phi(x)` with conjugator `g`: `rho(x) = g rho(phi(x)) g^-1`.
#[derive(Debug, Clone)]
pub struct SurfaceAutomorphismData {
    pub order: u32,
    pub substitution: Vec<Word>,
    pub conjugator: Matrix<C>,
}

impl SurfaceAutomorphismData {
    pub fn identity(genus: usize, n: usize) -> Self {
        Self {
            order: 1,
            substitution: (0..2 * genus).map(|k| vec![(k, 1)]).collect(),
            conjugator: Matrix::identity(n),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "order": self.order,
            "substitution": self.substitution.iter().map(|w| format_word(w)).collect::<Vec<_>>(),
            "conjugator": self.conjugator.to_json(),
        })
    }

    pub fn from_json(v: &Value, genus: usize) -> Result<Self, SurfaceError> {
        let order = v["order"].as_u64().unwrap_or(0) as u32;
        let substitution = v["substitution"]
            .as_array()
            .ok_or_else(|| SurfaceError::DimensionMismatch("missing substitution".into()))?
            .iter()
            .map(|w| parse_word(w.as_str().unwrap_or(""), genus))
            .collect::<Result<Vec<_>, _>>()?;
        let conjugator = Matrix::from_json(&v["conjugator"])?;
        Ok(Self {
            order,
            substitution,
            conjugator,
        })
    }
}

pub fn automorphism_chain_map(
    rep: &SurfaceRepresentation,
    aut: &SurfaceAutomorphismData,
    tol: f64,
) -> Result<ChainEndomorphism<C>, SurfaceError> {
    let n = rep.lie.dim;
    let g2 = 2 * rep.genus;
    if aut.substitution.len() != g2 {
        return Err(SurfaceError::DimensionMismatch(format!(
            "substitution has {} words for {g2} generators",
            aut.substitution.len()
        )));
    }
    let g = &aut.conjugator;
    if !is_unitary(g, tol.max(1e-12) * 10.0) {
        return Err(SurfaceError::NotUnitary(usize::MAX));
    }
    let ginv = adjoint_conj(g);
    for (k, w) in aut.substitution.iter().enumerate() {
        let rhs = g.mul(&rep.rho_word(w)).mul(&ginv);
        let deviation = rhs.sub(&rep.generators[k]).max_abs();
        if deviation > tol.max(1e-12) * 100.0 {
            return Err(SurfaceError::IncompatibleTwisting { generator: k, deviation });
        }
    }
    let phi_r: Word = rep
        .relator()
        .iter()
        .flat_map(|&(k, e)| if e > 0 { aut.substitution[k].clone() } else { inverse_word(&aut.substitution[k]) })
        .collect();
    let (w, eps) = conjugator_to_relator(&phi_r, &rep.relator()).ok_or(SurfaceError::RelatorNotPreserved)?;
    let ad_g = rep.lie.group_adjoint(g);
    let f0 = ad_g.clone();
    let mut f1 = Matrix::zeros(g2 * n, g2 * n);
    for (j, word) in aut.substitution.iter().enumerate() {
        let row = ad_g.mul(&rep.fox_row(word));
        for r in 0..n {
            for col in 0..g2 * n {
                f1.set(j * n + r, col, *row.get(r, col));
            }
        }
    }
    let f2 = ad_g.mul(&rep.ad_word(&w)).scale(&C::new(eps as f64, 0.0));
    let c = twisted_complex(rep, tol)?;
    Ok(ChainEndomorphism::new(c, vec![f0, f1, f2], aut.order, tol.max(1e-12) * 1e3)?)
}

/// Matrices of the induced action on `H^j` in the basis `h`.
pub fn cohomology_action(
    f: &ChainEndomorphism<C>,
    h: &CohomologyData<C>,
    tol: f64,
) -> Result<Vec<Matrix<C>>, SurfaceError> {
    (0..f.base.num_degrees())
        .map(|j| {
            if h.dim(j) == 0 {
                return Ok(Matrix::zeros(0, 0));
            }
            Ok(class_coordinate_matrix(&f.base, h, j, &f.maps[j].mul(&h.lifts[j]), tol)?)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AutomorphismReport {
    pub betti: Vec<usize>,
    pub phases: Vec<Vec<Phase>>,
    pub preserves_omega: Option<f64>,
    pub fixed_dim: usize,
    pub fixed_omega_rank: usize,
}

/// Eigenphases on each `H^j`, `f^* omega = omega` deviation (when `omega` is
/// nondegenerate), and the rank of `omega` restricted to `ker(1 - f^1)`.
pub fn automorphism_report(
    rep: &SurfaceRepresentation,
    aut: &SurfaceAutomorphismData,
    tol: f64,
) -> Result<AutomorphismReport, SurfaceError> {
    let f = automorphism_chain_map(rep, aut, tol)?;
    let h = cohomology(&f.base, tol);
    let action = cohomology_action(&f, &h, tol)?;
    let phases = action
        .iter()
        .map(|m| {
            if m.rows() == 0 {
                Ok(Vec::new())
            } else {
                eigenphases_finite_order(m, aut.order.max(1), tol.max(1e-9))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let omega = symplectic_form_in_basis(rep, &h, tol).ok();
    let f1 = &action[1];
    let (preserves, fixed_dim, fixed_rank) = match &omega {
        Some(o) => {
            let pulled = f1.transpose().mul(&o.matrix).mul(f1);
            let dev = pulled.sub(&o.matrix).max_abs() / o.matrix.max_abs().max(1e-300);
            let k = Matrix::identity(f1.rows()).sub(f1).kernel(1e-8);
            let restricted = k.transpose().mul(&o.matrix).mul(&k);
            (Some(dev), k.cols(), restricted.rank(1e-8))
        }
        None => (None, 0, 0),
    };
    Ok(AutomorphismReport {
        betti: h.dims(),
        phases,
        preserves_omega: preserves,
        fixed_dim,
        fixed_omega_rank: fixed_rank,
    })
}

pub mod fixtures {
    //! Representations and automorphisms used by tests, examples and the verify suite.

    use super::*;
    use crate::lie_algebra::expm;

    fn su2_element(v: [f64; 3]) -> Matrix<C> {
        // v . (i sigma)
        let i = C::new(0.0, 1.0);
        Matrix::from_rows(vec![
            vec![i * v[2], i * v[0] + C::new(v[1], 0.0)],
            vec![i * v[0] - C::new(v[1], 0.0), -i * v[2]],
        ])
        .unwrap()
    }

    fn normalize(v: [f64; 3]) -> [f64; 3] {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    }

    /// Axes of equal length for the genus-2 fixture.
    const AXIS_A: [f64; 3] = [0.6, 0.0, 0.8];
    const AXIS_B: [f64; 3] = [0.0, 0.28, 0.96];
    const ANGLE: f64 = 0.9;

    /// Genus 2, `(x1, y1, x2, y2) -> (A, B, B, A)` with non-commuting `A`, `B` in SU(2).
    pub fn irreducible_genus2_su2() -> SurfaceRepresentation {
        let a = expm(&su2_element(AXIS_A.map(|x| x * ANGLE)));
        let b = expm(&su2_element(AXIS_B.map(|x| x * ANGLE)));
        SurfaceRepresentation::new(2, LieData::su(2).unwrap(), vec![a.clone(), b.clone(), b, a], 1e-12)
            .expect("relator holds")
    }

    /// Swap of the two handles, compensated by the half-turn `g` exchanging `A` and `B`.
    pub fn handle_swap() -> SurfaceAutomorphismData {
        let axis = normalize([AXIS_A[0] + AXIS_B[0], AXIS_A[1] + AXIS_B[1], AXIS_A[2] + AXIS_B[2]]);
        // exp((pi/2) i sigma.n) = i sigma.n, a half-turn in SO(3)
        let g = su2_element(axis);
        SurfaceAutomorphismData {
            order: 2,
            substitution: vec![vec![(2, 1)], vec![(3, 1)], vec![(0, 1)], vec![(1, 1)]],
            conjugator: g,
        }
    }

    /// `x -> x^-1, y -> y^-1` on the torus.
    pub fn hyperelliptic_genus1(n: usize) -> SurfaceAutomorphismData {
        SurfaceAutomorphismData {
            order: 2,
            substitution: vec![vec![(0, -1)], vec![(1, -1)]],
            conjugator: Matrix::identity(n),
        }
    }

    /// `x -> y, y -> x^-1` on the torus.
    pub fn order4_genus1(n: usize) -> SurfaceAutomorphismData {
        SurfaceAutomorphismData {
            order: 4,
            substitution: vec![vec![(1, 1)], vec![(0, -1)]],
            conjugator: Matrix::identity(n),
        }
    }

    /// `x -> y, y -> y^-1 x^-1` on the torus.
    pub fn order3_genus1(n: usize) -> SurfaceAutomorphismData {
        SurfaceAutomorphismData {
            order: 3,
            substitution: vec![vec![(1, 1)], vec![(1, -1), (0, -1)]],
            conjugator: Matrix::identity(n),
        }
    }

    /// A central representation of genus 1: all generators `-1` in SU(2).
    pub fn central_genus1_su2() -> SurfaceRepresentation {
        let m = Matrix::<C>::identity(2).neg();
        SurfaceRepresentation::new(1, LieData::su(2).unwrap(), vec![m.clone(), m], 1e-12).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::cochain::betti_numbers;

    const TOL: f64 = 1e-9;

    #[test]
    fn word_parsing_round_trip() {
        let w = parse_word("x1 y2^-1 x2", 2).unwrap();
        assert_eq!(w, vec![(0, 1), (3, -1), (2, 1)]);
        assert_eq!(format_word(&w), "x1 y2^-1 x2");
        assert!(parse_word("z1", 2).is_err());
        assert!(parse_word("x3", 2).is_err());
    }

    #[test]
    fn conjugator_search() {
        let r = surface_relator(2);
        let (w, eps) = conjugator_to_relator(&r, &r).unwrap();
        assert!(w.is_empty() && eps == 1);
        let inv = inverse_word(&r);
        assert_eq!(conjugator_to_relator(&inv, &r).unwrap().1, -1);
        // [x2,y2][x1,y1] = C1^-1 R C1
        let swapped: Word = r[4..].iter().chain(&r[..4]).copied().collect();
        let (w, eps) = conjugator_to_relator(&swapped, &r).unwrap();
        assert_eq!(eps, 1);
        let mut rebuilt = w.clone();
        rebuilt.extend(&r);
        rebuilt.extend(inverse_word(&w));
        assert_eq!(free_reduce(&rebuilt), swapped);
    }

    #[test]
    fn trivial_representation_betti_numbers() {
        for genus in 1..=2 {
            let rep = SurfaceRepresentation::trivial(genus, LieData::su(2).unwrap());
            let c = twisted_complex(&rep, TOL).unwrap();
            assert_eq!(betti_numbers(&c, TOL), vec![3, 6 * genus, 3]);
        }
    }

    #[test]
    fn irreducible_genus2_betti_numbers() {
        let rep = irreducible_genus2_su2();
        let c = twisted_complex(&rep, TOL).unwrap();
        assert_eq!(betti_numbers(&c, TOL), vec![0, 6, 0]);
        assert_eq!(commutant_dimension(&rep, 1e-9), 1);
    }

    #[test]
    fn central_representation_has_invariants() {
        let rep = central_genus1_su2();
        let c = twisted_complex(&rep, TOL).unwrap();
        assert!(betti_numbers(&c, TOL)[0] > 0);
    }

    #[test]
    fn trivial_coefficients_reduce_to_intersection_form() {
        let rep = SurfaceRepresentation::trivial(1, LieData::su(2).unwrap());
        let n = 3;
        // a = e_1 on x, b = e_1 on y: <a cup b> = <e_1, e_1>_g = 1/(8 pi^2)
        let mut a = vec![C::new(0.0, 0.0); 2 * n];
        let mut b = a.clone();
        a[0] = C::new(1.0, 0.0);
        b[n] = C::new(1.0, 0.0);
        let expected = 1.0 / (8.0 * std::f64::consts::PI.powi(2));
        assert!((cup_pairing(&rep, &a, &b).re - expected).abs() < 1e-14);
        assert!((cup_pairing(&rep, &b, &a).re + expected).abs() < 1e-14);
    }

    #[test]
    fn omega_on_irreducible_fixture() {
        let rep = irreducible_genus2_su2();
        let o = symplectic_form(&rep, TOL).unwrap();
        assert!(o.antisymmetry_deviation < 1e-12);
        let r = omega_property(&o.matrix, 1e-12).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn cup_product_ignores_coboundaries() {
        let rep = irreducible_genus2_su2();
        let c = twisted_complex(&rep, TOL).unwrap();
        let h = cohomology(&c, TOL);
        let lifts = h.lifts[1].columns();
        let v: Vec<C> = (0..3).map(|k| C::new(0.3 * k as f64 - 0.2, 0.0)).collect();
        let dv = c.d(0).mul_vec(&v);
        let shifted: Vec<C> = lifts[0].iter().zip(&dv).map(|(a, b)| a + b).collect();
        let p0 = cup_pairing(&rep, &lifts[0], &lifts[1]);
        let p1 = cup_pairing(&rep, &shifted, &lifts[1]);
        assert!((p0 - p1).norm() < 1e-13);
    }

    #[test]
    fn poincare_pairing_is_minus_omega() {
        let rep = irreducible_genus2_su2();
        let o = symplectic_form(&rep, TOL).unwrap();
        let k = o.matrix.rows();
        for i in 0..k {
            for j in 0..k {
                let mut a = vec![C::new(0.0, 0.0); k];
                let mut b = a.clone();
                a[i] = C::new(1.0, 0.0);
                b[j] = C::new(1.0, 0.0);
                let pd = poincare_pairing(&rep, &o.basis, &a, &b).unwrap();
                assert!((pd + o.matrix.get(i, j)).norm() < 1e-13, "{i} {j}");
            }
        }
    }

    #[test]
    fn pfaffian_of_standard_form() {
        let z = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        let j = Matrix::from_rows(vec![vec![z, one], vec![-one, z]]).unwrap();
        assert_eq!(pfaffian(&j), one);
        let j4 = Matrix::block_diag(&j, &j.scale(&C::new(3.0, 0.0)));
        assert!((pfaffian(&j4) - C::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn identity_automorphism_is_identity_chain_map() {
        let rep = irreducible_genus2_su2();
        let f = automorphism_chain_map(&rep, &SurfaceAutomorphismData::identity(2, 2), TOL).unwrap();
        for m in &f.maps {
            assert!(m.approx_eq(&Matrix::identity(m.rows()), 1e-12));
        }
    }

    #[test]
    fn handle_swap_has_order_two_and_preserves_omega() {
        let rep = irreducible_genus2_su2();
        let rep_report = automorphism_report(&rep, &handle_swap(), TOL).unwrap();
        assert_eq!(rep_report.betti, vec![0, 6, 0]);
        assert!(rep_report.preserves_omega.unwrap() < 1e-10);
        assert_eq!(rep_report.fixed_omega_rank, rep_report.fixed_dim);
        assert_eq!(rep_report.phases[1].len(), 6);
    }

    #[test]
    fn hopf_trace_formula_matches_phases() {
        let cases = [
            (irreducible_genus2_su2(), handle_swap()),
            (SurfaceRepresentation::trivial(1, LieData::su(2).unwrap()), order4_genus1(2)),
            (SurfaceRepresentation::trivial(1, LieData::su(3).unwrap()), order3_genus1(3)),
        ];
        for (rep, aut) in cases {
            let f = automorphism_chain_map(&rep, &aut, TOL).unwrap();
            let chain: C = f
                .maps
                .iter()
                .enumerate()
                .map(|(j, m)| crate::lie_algebra::trace(m) * if j % 2 == 0 { 1.0 } else { -1.0 })
                .sum();
            let r = automorphism_report(&rep, &aut, TOL).unwrap();
            let homology: C = r
                .phases
                .iter()
                .enumerate()
                .map(|(j, ps)| ps.iter().map(Phase::root_of_unity).sum::<C>() * if j % 2 == 0 { 1.0 } else { -1.0 })
                .sum();
            assert!((chain - homology).norm() < 1e-9, "{chain} vs {homology}");
        }
    }

    #[test]
    fn hyperelliptic_acts_by_minus_one() {
        let rep = SurfaceRepresentation::trivial(1, LieData::su(2).unwrap());
        let r = automorphism_report(&rep, &hyperelliptic_genus1(2), TOL).unwrap();
        assert_eq!(r.phases[1], vec![Phase::new(1, 2); 6]);
        assert_eq!(r.phases[0], vec![Phase::zero(); 3]);
        assert_eq!(r.phases[2], vec![Phase::zero(); 3]);
    }

    #[test]
    fn order_four_rotation_phases() {
        let rep = SurfaceRepresentation::trivial(1, LieData::su(2).unwrap());
        let r = automorphism_report(&rep, &order4_genus1(2), TOL).unwrap();
        let mut expected = vec![Phase::new(1, 4); 3];
        expected.extend(vec![Phase::new(3, 4); 3]);
        assert_eq!(r.phases[1], expected);
        let r3 = automorphism_report(&rep, &order3_genus1(2), TOL).unwrap();
        assert_eq!(r3.phases[1].iter().filter(|p| **p == Phase::new(1, 3)).count(), 3);
    }
}
