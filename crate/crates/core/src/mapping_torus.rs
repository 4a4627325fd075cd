//! Algebraic mapping tori `T^i = C^i + C^{i-1}`, `d_f(x, y) = (dx, -dy + mu x)`
//! with `mu = 1 - f`, and three routes to their torsion: the Wang long exact
//! sequence, the closed form for general monodromy and the closed form for
//! monodromy of finite order.
//!
//! In cohomology we write `P_i : H^i(T) -> H^i(C)` for restriction,
//! `U_i = mu^* : H^i(C) -> H^i(C)` and `N_i : H^i(C) -> H^{i+1}(T)` for the
//! map induced by `y -> (0, y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cochain::{
    class_coordinate_matrix, cohomology, torsion, validate_cohomology, CochainComplex, CochainError,
    CohomologyData, TorsionValue,
};
use crate::exact_sequences::{long_exact_sequence_with, SequenceError, ShortExactSequence};
use crate::linalg::{LinalgError, Matrix};
use crate::scalar::{Magnitude, Scalar, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("f is not a chain map in degree {degree}")]
    NotChainMap { degree: usize },
    #[error("f^{order} != id in degree {degree}")]
    NotFiniteOrder { order: u32, degree: usize },
    #[error("no valid choice of cohomology bases: {0}")]
    NoValidChoice(String),
    #[error("induced map on H^{degree}/ker mu is singular")]
    MuBarSingular { degree: usize },
    #[error("det on quotient ({quotient}) differs from det on image ({image}) in degree {degree}")]
    QuotientDetMismatch { degree: usize, quotient: f64, image: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Degree-preserving chain map of a complex, with declared order (`0` for none).
#[derive(Debug, Clone)]
pub struct ChainEndomorphism<F> {
    pub base: CochainComplex<F>,
    pub maps: Vec<Matrix<F>>,
    pub order: u32,
}

impl<F: Scalar> ChainEndomorphism<F> {
    pub fn new(base: CochainComplex<F>, maps: Vec<Matrix<F>>, order: u32, tol: f64) -> Result<Self, TorusError> {
        if maps.len() != base.num_degrees() {
            return Err(TorusError::DimensionMismatch(format!(
                "{} maps for {} degrees",
                maps.len(),
                base.num_degrees()
            )));
        }
        for (j, m) in maps.iter().enumerate() {
            if m.rows() != base.dim(j) || m.cols() != base.dim(j) {
                return Err(TorusError::DimensionMismatch(format!(
                    "f_{j} is {}x{}, C^{j} has dimension {}",
                    m.rows(),
                    m.cols(),
                    base.dim(j)
                )));
            }
        }
        for j in 0..base.num_degrees().saturating_sub(1) {
            let lhs = base.d(j).mul(&maps[j]);
            let rhs = maps[j + 1].mul(&base.d(j));
            if !lhs.approx_eq(&rhs, tol) {
                return Err(TorusError::NotChainMap { degree: j });
            }
        }
        if order > 0 {
            for (j, m) in maps.iter().enumerate() {
                if !m.pow(order).approx_eq(&Matrix::identity(m.rows()), tol.max(0.0) * 10.0) {
                    return Err(TorusError::NotFiniteOrder { order, degree: j });
                }
            }
        }
        Ok(Self { base, maps, order })
    }

    pub fn identity(base: CochainComplex<F>) -> Self {
        let maps = base.dims().iter().map(|&n| Matrix::identity(n)).collect();
        Self { base, maps, order: 1 }
    }

    /// `mu_i = 1 - f_i`.
    pub fn mu(&self, i: usize) -> Matrix<F> {
        Matrix::identity(self.base.dim(i)).sub(&self.maps[i])
    }

    /// `g f g^{-1}` for a chain automorphism `g` of the same complex.
    pub fn conjugated(&self, g: &[Matrix<F>], tol: f64) -> Result<Self, TorusError> {
        let maps = self
            .maps
            .iter()
            .zip(g)
            .enumerate()
            .map(|(j, (f, gj))| {
                let inv = gj
                    .inverse(tol)
                    .ok_or_else(|| TorusError::NoValidChoice(format!("g_{j} is not invertible")))?;
                Ok(gj.mul(f).mul(&inv))
            })
            .collect::<Result<Vec<_>, TorusError>>()?;
        ChainEndomorphism::new(self.base.clone(), maps, self.order, tol)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "order": self.order,
            "maps": self.maps.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(base: CochainComplex<F>, v: &Value, tol: f64) -> Result<Self, TorusError> {
        let order = v["order"].as_u64().unwrap_or(0) as u32;
        let maps = v["maps"]
            .as_array()
            .ok_or_else(|| TorusError::DimensionMismatch("missing maps".into()))?
            .iter()
            .map(Matrix::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(base, maps, order, tol)
    }
}

#[derive(Debug, Clone)]
pub struct AlgebraicMappingTorus<F> {
    pub complex: CochainComplex<F>,
    pub map: ChainEndomorphism<F>,
}

impl<F: Scalar> AlgebraicMappingTorus<F> {
    /// `nu(y) = (0, y)` as a matrix `C^{i-1} -> T^i`.
    pub fn nu(&self, i: usize) -> Matrix<F> {
        let c = &self.map.base;
        let (top, bottom) = (c.dim(i), if i == 0 { 0 } else { c.dim(i - 1) });
        Matrix::from_fn(top + bottom, bottom, |r, k| if r == top + k { F::one() } else { F::zero() })
    }

    /// `pi(x, y) = x` as a matrix `T^i -> C^i`.
    pub fn pi(&self, i: usize) -> Matrix<F> {
        let c = &self.map.base;
        let (top, bottom) = (c.dim(i), if i == 0 { 0 } else { c.dim(i - 1) });
        Matrix::from_fn(top, top + bottom, |r, k| if r == k { F::one() } else { F::zero() })
    }
}

pub fn build_mapping_torus<F: Scalar>(f: &ChainEndomorphism<F>, tol: f64) -> Result<AlgebraicMappingTorus<F>, TorusError> {
    let c = &f.base;
    let n = c.num_degrees();
    let dims: Vec<usize> = (0..=n)
        .map(|i| c.dim(i) + if i == 0 { 0 } else { c.dim(i - 1) })
        .collect();
    let d = (0..n)
        .map(|i| {
            let (x_in, y_in) = (c.dim(i), if i == 0 { 0 } else { c.dim(i - 1) });
            let (x_out, y_out) = (c.dim(i + 1), c.dim(i));
            let di = c.d(i);
            let dprev = if i == 0 { Matrix::zeros(c.dim(0), 0) } else { c.d(i - 1) };
            let mu = f.mu(i);
            Matrix::from_fn(x_out + y_out, x_in + y_in, |r, k| match (r < x_out, k < x_in) {
                (true, true) => di.get(r, k).clone(),
                (true, false) => F::zero(),
                (false, true) => mu.get(r - x_out, k).clone(),
                (false, false) => -dprev.get(r - x_out, k - x_in).clone(),
            })
        })
        .collect();
    let complex = CochainComplex::new(dims, d, tol)?;
    Ok(AlgebraicMappingTorus {
        complex,
        map: f.clone(),
    })
}

/// `0 -> C[-1] -> T(f) -> C -> 0`.
pub fn wang_sequence<F: Scalar>(t: &AlgebraicMappingTorus<F>, tol: f64) -> Result<ShortExactSequence<F>, TorusError> {
    let c = &t.map.base;
    let n = t.complex.num_degrees();
    let nu = (0..n).map(|i| t.nu(i)).collect();
    let pi = (0..n).map(|i| t.pi(i)).collect();
    Ok(ShortExactSequence::new(c.shifted(), t.complex.clone(), c.padded(n), nu, pi, tol)?)
}

pub fn torsion_via_wang<F: Scalar>(f: &ChainEndomorphism<F>, tol: f64) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    let t = build_mapping_torus(f, tol)?;
    let hc = cohomology(&f.base, tol);
    let ht = cohomology(&t.complex, tol);
    torsion_via_wang_with(&t, &hc, &ht, tol)
}

/// Torsion of the Wang long exact sequence based by `hc` on `C` (and its shift) and `ht` on `T`.
pub fn torsion_via_wang_with<F: Scalar>(
    t: &AlgebraicMappingTorus<F>,
    hc: &CohomologyData<F>,
    ht: &CohomologyData<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    let s = wang_sequence(t, tol)?;
    let n = t.complex.num_degrees();
    let les = long_exact_sequence_with(&s, hc.shifted(), ht.clone(), hc.padded(n), tol)?;
    let value = les.torsion(tol)?.value;
    Ok(TorsionValue::new(
        value,
        "Wang sequence H^(i-1)(C) -> H^i(T) -> H^i(C) based by the chosen cohomology bases, cells of T orthonormal",
    ))
}

/// Definition torsion of the torus complex in basis `ht`.
pub fn torsion_definition<F: Scalar>(
    t: &AlgebraicMappingTorus<F>,
    ht: &CohomologyData<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    Ok(torsion(&t.complex, ht, tol)?)
}

/// Cohomology-level maps `U_i`, `P_i`, `N_i` in the bases `hc`, `ht`.
#[derive(Debug, Clone)]
pub struct InducedMaps<F> {
    pub u: Vec<Matrix<F>>,
    pub p: Vec<Matrix<F>>,
    /// `n[i] : H^i(C) -> H^{i+1}(T)`.
    pub n: Vec<Matrix<F>>,
}

pub fn induced_maps<F: Scalar>(
    t: &AlgebraicMappingTorus<F>,
    hc: &CohomologyData<F>,
    ht: &CohomologyData<F>,
    tol: f64,
) -> Result<InducedMaps<F>, TorusError> {
    let c = &t.map.base;
    let nc = c.num_degrees();
    let lift = |h: &CohomologyData<F>, j: usize, rows: usize| match h.lifts.get(j) {
        Some(l) if l.cols() > 0 => l.clone(),
        _ => Matrix::zeros(rows, 0),
    };
    let mut u = Vec::with_capacity(nc);
    let mut p = Vec::with_capacity(nc + 1);
    let mut nn = Vec::with_capacity(nc);
    for i in 0..nc {
        let hci = lift(hc, i, c.dim(i));
        u.push(class_coordinate_matrix(c, hc, i, &t.map.mu(i).mul(&hci), tol)?);
        let hti = lift(ht, i, t.complex.dim(i));
        p.push(class_coordinate_matrix(c, hc, i, &t.pi(i).mul(&hti), tol)?);
        nn.push(class_coordinate_matrix(&t.complex, ht, i + 1, &t.nu(i + 1).mul(&hci), tol)?);
    }
    Ok(InducedMaps { u, p, n: nn })
}

/// Bilinear pairing between cohomology lifts of the torus in complementary degrees.
pub trait Pairing<F: Scalar> {
    /// `|Theta(a)(b)|` for the wedges of the columns of `a` and `b`, or `None` when undefined.
    fn pair(&self, a: &Matrix<F>, b: &Matrix<F>) -> Option<F::Magnitude>;
}

/// `|det(a^T b)|` scaled by `multiple` per column, defined when shapes agree.
#[derive(Debug, Clone, Copy)]
pub struct InnerProductPairing {
    pub multiple: i64,
}

impl Default for InnerProductPairing {
    fn default() -> Self {
        Self { multiple: 1 }
    }
}

impl<F: Scalar> Pairing<F> for InnerProductPairing {
    fn pair(&self, a: &Matrix<F>, b: &Matrix<F>) -> Option<F::Magnitude> {
        if a.rows() != b.rows() || a.cols() != b.cols() || a.cols() == 0 {
            return None;
        }
        let g = a.transpose().mul(b).scale(&F::from_i64(self.multiple));
        let det = g.det().ok()?;
        let m = det.magnitude();
        (!m.is_zero()).then_some(m)
    }
}

/// Optional user choices for the general closed form, in cohomology coordinates.
#[derive(Debug, Clone)]
pub struct GeneralChoices<F> {
    /// `h^i` in coordinates of the torus basis.
    pub h: Option<Vec<Matrix<F>>>,
    pub h_minus: Option<Vec<Matrix<F>>>,
    pub h_plus: Option<Vec<Matrix<F>>>,
    /// Seed for the perturbation of `h_+` when `h_- ^ h_+ = 0`.
    pub seed: u64,
}

impl<F> Default for GeneralChoices<F> {
    fn default() -> Self {
        Self {
            h: None,
            h_minus: None,
            h_plus: None,
            seed: 0,
        }
    }
}

fn abs_det<F: Scalar>(m: &Matrix<F>) -> Result<F::Magnitude, TorusError> {
    Ok(m.det()?.magnitude())
}

fn scale_first_column<F: Scalar>(m: &mut Matrix<F>, s: &F::Magnitude) {
    if m.cols() == 0 {
        return;
    }
    for r in 0..m.rows() {
        let v = m.get(r, 0).clone() * F::from_magnitude(s);
        m.set(r, 0, v);
    }
}

fn nonsingular<F: Scalar>(m: &Matrix<F>, tol: f64) -> bool {
    m.is_square() && m.rank(tol) == m.rows()
}

/// Lifts `(0, x)` in `T^{i+1}` of the classes `hc * coords` in `H^i(C)`.
fn nu_lifts<F: Scalar>(t: &AlgebraicMappingTorus<F>, hc: &CohomologyData<F>, i: usize, coords: &Matrix<F>) -> Matrix<F> {
    let rows = t.complex.dim(i + 1);
    if coords.cols() == 0 || hc.dim(i) == 0 {
        return Matrix::zeros(rows, coords.cols());
    }
    t.nu(i + 1).mul(&hc.lifts[i]).mul(coords)
}

fn torus_lifts<F: Scalar>(t: &AlgebraicMappingTorus<F>, ht: &CohomologyData<F>, i: usize, coords: &Matrix<F>) -> Matrix<F> {
    let rows = t.complex.dim(i);
    if coords.cols() == 0 || ht.dim(i) == 0 {
        return Matrix::zeros(rows, coords.cols());
    }
    ht.lifts[i].mul(coords)
}

pub fn torsion_closed_form_general<F: Scalar>(
    f: &ChainEndomorphism<F>,
    choices: &GeneralChoices<F>,
    pairing: &dyn Pairing<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    let t = build_mapping_torus(f, tol)?;
    let hc = cohomology(&f.base, tol);
    let ht = cohomology(&t.complex, tol);
    torsion_closed_form_general_with(&t, &hc, &ht, choices, pairing, tol)
}

/// General closed form relative to the torus basis `ht`:
/// `prod_i |det A_i|^{(-1)^{i+1}} prod_i |det mu~^i|^{(-1)^{i+1}}` with
/// `A_i = [N h_-^{i-1} | h^i]` in `ht` coordinates.
pub fn torsion_closed_form_general_with<F: Scalar>(
    t: &AlgebraicMappingTorus<F>,
    hc: &CohomologyData<F>,
    ht: &CohomologyData<F>,
    choices: &GeneralChoices<F>,
    pairing: &dyn Pairing<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    validate_cohomology(&t.map.base, hc, tol)?;
    validate_cohomology(&t.complex, ht, tol)?;
    let maps = induced_maps(t, hc, ht, tol)?;
    let nc = t.map.base.num_degrees();
    let nt = t.complex.num_degrees();
    let mut rng = ChaCha8Rng::seed_from_u64(choices.seed);
    let mut notes: Vec<String> = Vec::new();

    let mut h_minus: Vec<Matrix<F>> = Vec::with_capacity(nc);
    let mut h_plus: Vec<Matrix<F>> = Vec::with_capacity(nc);
    let mut h: Vec<Matrix<F>> = Vec::with_capacity(nt);
    for i in 0..nt {
        let incoming = if i == 0 { Matrix::zeros(ht.dim(0), 0) } else { maps.n[i - 1].clone() };
        let default = incoming.rank_kernel_image(tol).image.complement(tol);
        h.push(choices.h.as_ref().map(|v| v[i].clone()).unwrap_or(default));
    }
    for i in 0..nc {
        let u = &maps.u[i];
        let m = hc.dim(i);
        let rki = u.rank_kernel_image(tol);
        let hm = choices
            .h_minus
            .as_ref()
            .map(|v| v[i].clone())
            .unwrap_or_else(|| rki.image.complement(tol));
        let mut hp = choices
            .h_plus
            .as_ref()
            .map(|v| v[i].clone())
            .unwrap_or_else(|| rki.kernel.complement(tol));
        if hm.rows() != m || hp.rows() != m || hm.cols() + hp.cols() != m {
            return Err(TorusError::NoValidChoice(format!(
                "degree {i}: h_- and h_+ must give {m} columns of length {m}"
            )));
        }
        if !nonsingular(&Matrix::hstack(m, &[&hm, &u.mul(&hp)]), tol) {
            return Err(TorusError::NoValidChoice(format!("degree {i}: mu(h_+) ^ h_- = 0")));
        }
        let mut attempts = 0;
        while !nonsingular(&Matrix::hstack(m, &[&hm, &hp]), tol) {
            attempts += 1;
            if attempts > 64 {
                return Err(TorusError::NoValidChoice(format!("degree {i}: could not make h_+ ^ h_- nonzero")));
            }
            let r = Matrix::from_fn(rki.kernel.cols(), hp.cols(), |_, _| F::from_i64(rng.gen_range(-3..=3)));
            hp = hp.add(&rki.kernel.mul(&r));
        }
        if attempts > 0 {
            notes.push(format!("h_+^{i} perturbed by kernel vectors"));
        }
        h_minus.push(hm);
        h_plus.push(hp);
    }
    for i in 0..nt {
        let incoming = if i == 0 { Matrix::zeros(ht.dim(0), 0) } else { maps.n[i - 1].mul(&h_minus[i - 1]) };
        if !nonsingular(&Matrix::hstack(ht.dim(i), &[&incoming, &h[i]]), tol) {
            return Err(TorusError::NoValidChoice(format!("degree {i}: nu(h_-) ^ h = 0")));
        }
        if i < nc {
            let ph = maps.p[i].mul(&h[i]);
            if !nonsingular(&Matrix::hstack(hc.dim(i), &[&ph, &h_plus[i]]), tol) {
                return Err(TorusError::NoValidChoice(format!("degree {i}: pi(h) ^ h_+ = 0")));
            }
        }
    }

    // Normalizations. a_i = |h_- ^ h_+|, b_i = |pi(h) ^ h_+|.
    let ab = |hm: &[Matrix<F>], h: &[Matrix<F>], i: usize| -> Result<(F::Magnitude, F::Magnitude), TorusError> {
        let m = hc.dim(i);
        let a = abs_det(&Matrix::hstack(m, &[&hm[i], &h_plus[i]]))?;
        let b = abs_det(&Matrix::hstack(m, &[&maps.p[i].mul(&h[i]), &h_plus[i]]))?;
        Ok((a, b))
    };
    let top = nc - 1;
    let theta = |hm: &[Matrix<F>], h: &[Matrix<F>], i: usize| -> Option<F::Magnitude> {
        let j = top - i;
        pairing.pair(&nu_lifts(t, hc, j, &hm[j]), &torus_lifts(t, ht, i, &h[i]))
    };
    let mut alpha: Vec<F::Magnitude> = vec![<F::Magnitude as Magnitude>::one(); nc];
    let mut theta_solved: Vec<usize> = Vec::new();
    let mut theta_skipped: Vec<usize> = Vec::new();
    for i in 0..nc {
        let j = top - i;
        if i > j || h[i].cols() == 0 || h[j].cols() == 0 {
            continue;
        }
        let (Some(pi), Some(pj)) = (theta(&h_minus, &h, i), theta(&h_minus, &h, j)) else {
            theta_skipped.push(i);
            continue;
        };
        let (ai, bi) = ab(&h_minus, &h, i)?;
        let (aj, bj) = ab(&h_minus, &h, j)?;
        if i == j {
            match ai.div(&bi.mul(&pi)).sqrt_exact() {
                Some(s) => {
                    alpha[i] = s;
                    theta_solved.push(i);
                }
                None => theta_skipped.push(i),
            }
        } else {
            let lhs = aj.div(&bj.mul(&pi));
            let rhs = ai.div(&bi.mul(&pj));
            let consistent = if F::EXACT { lhs == rhs } else { lhs.rel_deviation(&rhs) < tol.max(DEFAULT_TOL) * 1e3 };
            if consistent {
                alpha[i] = lhs;
                theta_solved.push(i);
                theta_solved.push(j);
            } else {
                theta_skipped.push(i);
                theta_skipped.push(j);
            }
        }
    }
    for i in 0..nc {
        scale_first_column(&mut h[i], &alpha[i]);
        let (a, b) = ab(&h_minus, &h, i)?;
        if h_minus[i].cols() > 0 {
            let beta = b.div(&a);
            scale_first_column(&mut h_minus[i], &beta);
        }
        let (a, b) = ab(&h_minus, &h, i)?;
        let ok = if F::EXACT { a == b } else { a.rel_deviation(&b) < tol.max(DEFAULT_TOL) * 1e3 };
        if !ok {
            return Err(TorusError::NoValidChoice(format!("degree {i}: |h_- ^ h_+| != |pi(h) ^ h_+| after rescaling")));
        }
    }
    theta_solved.sort_unstable();
    theta_solved.dedup();
    theta_skipped.sort_unstable();
    theta_skipped.dedup();
    let mut theta_held = Vec::new();
    for &i in &theta_solved {
        if let Some(p) = theta(&h_minus, &h, i) {
            let one = <F::Magnitude as Magnitude>::one();
            if p.rel_deviation(&one) < tol.max(DEFAULT_TOL) * 1e3 {
                theta_held.push(i);
            }
        }
    }

    let mut value = <F::Magnitude as Magnitude>::one();
    for i in 0..nt {
        let incoming = if i == 0 { Matrix::zeros(ht.dim(0), 0) } else { maps.n[i - 1].mul(&h_minus[i - 1]) };
        let a = Matrix::hstack(ht.dim(i), &[&incoming, &h[i]]);
        value = value.mul(&abs_det(&a)?.alternating(i + 1));
    }
    for i in 0..nc {
        let m = hc.dim(i);
        let num = abs_det(&Matrix::hstack(m, &[&h_minus[i], &maps.u[i].mul(&h_plus[i])]))?;
        let den = abs_det(&Matrix::hstack(m, &[&h_minus[i], &h_plus[i]]))?;
        value = value.mul(&num.div(&den).alternating(i + 1));
    }
    let mut convention = format!(
        "prod_i |det[N h_-^(i-1) | h^i]|^((-1)^(i+1)) prod_i |det mu~^i|^((-1)^(i+1)) in the torus cohomology basis; \
         |h_- ^ h_+| = |pi(h) ^ h_+| enforced; Theta normalized in degrees {theta_held:?}"
    );
    if !theta_skipped.is_empty() {
        convention.push_str(&format!("; Theta normalization not solvable in degrees {theta_skipped:?}"));
    }
    for n in notes {
        convention.push_str("; ");
        convention.push_str(&n);
    }
    Ok(TorsionValue::new(value, convention))
}

/// `det` of `u` on the quotient `V / ker u` and on `im u`.
pub fn quotient_and_image_dets<F: Scalar>(u: &Matrix<F>, tol: f64) -> Result<Option<(F, F)>, TorusError> {
    let n = u.rows();
    let rki = u.rank_kernel_image(tol);
    let k = rki.kernel;
    let im = rki.image;
    if Matrix::hstack(n, &[&k, &im]).rank(tol) != k.cols() + im.cols() {
        return Ok(None);
    }
    // Quotient: basis the classes of a complement q of ker u.
    let q = k.complement(tol);
    let basis = Matrix::hstack(n, &[&q, &k]);
    let inv = basis.inverse(tol).ok_or_else(|| TorusError::NoValidChoice("complement of kernel".into()))?;
    let coords = inv.mul(&u.mul(&q));
    let bar = Matrix::from_fn(q.cols(), q.cols(), |a, b| coords.get(a, b).clone());
    // Image: coordinates of u(im) in the image basis.
    let uim = u.mul(&im);
    let hat_cols = uim
        .columns()
        .iter()
        .map(|c| im.solve_in_span(c, tol).ok_or_else(|| TorusError::NoValidChoice("image not invariant".into())))
        .collect::<Result<Vec<_>, _>>()?;
    let hat = Matrix::from_columns(im.cols(), &hat_cols);
    Ok(Some((bar.det()?, hat.det()?)))
}

pub fn torsion_closed_form_finite_order<F: Scalar>(
    f: &ChainEndomorphism<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    let t = build_mapping_torus(f, tol)?;
    let hc = cohomology(&f.base, tol);
    let ht = cohomology(&t.complex, tol);
    torsion_closed_form_finite_order_with(&t, &hc, &ht, tol)
}

/// Finite-order closed form relative to `ht`: `h_-^i = pi(h^i)`, `h_+^i` spans `im mu`.
pub fn torsion_closed_form_finite_order_with<F: Scalar>(
    t: &AlgebraicMappingTorus<F>,
    hc: &CohomologyData<F>,
    ht: &CohomologyData<F>,
    tol: f64,
) -> Result<TorsionValue<F::Magnitude>, TorusError> {
    validate_cohomology(&t.map.base, hc, tol)?;
    validate_cohomology(&t.complex, ht, tol)?;
    let maps = induced_maps(t, hc, ht, tol)?;
    let nc = t.map.base.num_degrees();
    let nt = t.complex.num_degrees();
    let mut value = <F::Magnitude as Magnitude>::one();
    for i in 0..nc {
        let (bar, hat) = quotient_and_image_dets(&maps.u[i], tol)?.ok_or(TorusError::MuBarSingular { degree: i })?;
        let agree = if F::EXACT {
            bar == hat
        } else {
            (bar.clone() - hat.clone()).abs_f64() <= tol.max(DEFAULT_TOL) * 1e3 * bar.abs_f64().max(1.0)
        };
        if !agree {
            return Err(TorusError::QuotientDetMismatch {
                degree: i,
                quotient: bar.abs_f64(),
                image: hat.abs_f64(),
            });
        }
        if bar.is_negligible(tol) {
            return Err(TorusError::MuBarSingular { degree: i });
        }
        value = value.mul(&bar.magnitude().alternating(i + 1));
    }
    let h: Vec<Matrix<F>> = (0..nt)
        .map(|i| {
            let incoming = if i == 0 { Matrix::zeros(ht.dim(0), 0) } else { maps.n[i - 1].clone() };
            incoming.rank_kernel_image(tol).image.complement(tol)
        })
        .collect();
    for i in 0..nt {
        let incoming = if i == 0 {
            Matrix::zeros(ht.dim(0), 0)
        } else {
            maps.n[i - 1].mul(&maps.p[i - 1]).mul(&h[i - 1])
        };
        let a = Matrix::hstack(ht.dim(i), &[&incoming, &h[i]]);
        let det = a.det()?;
        if det.is_negligible(tol) {
            return Err(TorusError::NoValidChoice(format!("degree {i}: nu(pi(h)) ^ h = 0")));
        }
        value = value.mul(&det.magnitude().alternating(i + 1));
    }
    Ok(TorsionValue::new(
        value,
        "prod_i |det[N pi(h^(i-1)) | h^i]|^((-1)^(i+1)) prod_i |det mu-bar^i|^((-1)^(i+1)) in the torus cohomology basis",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn point(f: Matrix<Rational>, order: u32) -> ChainEndomorphism<Rational> {
        let n = f.rows();
        let c = CochainComplex::new(vec![n], vec![], 0.0).unwrap();
        ChainEndomorphism::new(c, vec![f], order, 0.0).unwrap()
    }

    fn all_routes(f: &ChainEndomorphism<Rational>) -> Vec<Rational> {
        let t = build_mapping_torus(f, 0.0).unwrap();
        let ht = cohomology(&t.complex, 0.0);
        vec![
            torsion_definition(&t, &ht, 0.0).unwrap().value,
            torsion_via_wang(f, 0.0).unwrap().value,
            torsion_closed_form_general(f, &GeneralChoices::default(), &InnerProductPairing::default(), 0.0)
                .unwrap()
                .value,
            torsion_closed_form_finite_order(f, 0.0).unwrap().value,
        ]
    }

    #[test]
    fn circle_with_identity_monodromy() {
        let f = point(Matrix::identity(1), 1);
        let t = build_mapping_torus(&f, 0.0).unwrap();
        assert_eq!(crate::cochain::betti_numbers(&t.complex, 0.0), vec![1, 1]);
        assert_eq!(all_routes(&f), vec![q(1, 1); 4]);
    }

    #[test]
    fn circle_with_minus_one() {
        let f = point(Matrix::identity(1).neg(), 2);
        let t = build_mapping_torus(&f, 0.0).unwrap();
        assert_eq!(crate::cochain::betti_numbers(&t.complex, 0.0), vec![0, 0]);
        assert_eq!(all_routes(&f), vec![q(1, 2); 4]);
    }

    #[test]
    fn rotation_by_third_turn() {
        let r = crate::random::cyclotomic_companion::<Rational>(3);
        let f = point(r, 3);
        assert_eq!(all_routes(&f), vec![q(1, 3); 4]);
    }

    #[test]
    fn torus_dimensions() {
        let c = CochainComplex::<Rational>::new(vec![1, 2], vec![Matrix::zeros(2, 1)], 0.0).unwrap();
        let f = ChainEndomorphism::identity(c);
        let t = build_mapping_torus(&f, 0.0).unwrap();
        assert_eq!(t.complex.dims(), &[1, 3, 2]);
    }

    #[test]
    fn quotient_and_image_dets_on_small_map() {
        let u = Matrix::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        let (bar, hat) = quotient_and_image_dets(&u, 0.0).unwrap().unwrap();
        assert_eq!(bar, hat);
        assert_eq!(bar, q(2, 1));
        let nilpotent = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        assert!(quotient_and_image_dets(&nilpotent, 0.0).unwrap().is_none());
    }

    #[test]
    fn rejects_non_chain_map() {
        let c = CochainComplex::<Rational>::new(vec![1, 1], vec![Matrix::identity(1)], 0.0).unwrap();
        let err = ChainEndomorphism::new(c, vec![Matrix::identity(1), Matrix::zeros(1, 1)], 0, 0.0).unwrap_err();
        assert_eq!(err, TorusError::NotChainMap { degree: 0 });
    }
}
