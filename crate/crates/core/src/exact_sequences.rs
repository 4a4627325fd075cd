//! Short exact sequences of complexes, the long exact cohomology sequence
//! and the multiplicativity of torsion.
//!
//! The long exact sequence `H^0(C1) -> H^0(C2) -> H^0(C3) -> H^1(C1) -> ...`
//! is treated as an acyclic complex with `H^j(C_k)` at position `3j + k`,
//! based by the chosen cohomology bases.

use serde_json::{json, Value};
use thiserror::Error;

use crate::cochain::{
    class_coordinate_matrix, cohomology, torsion, torsion_with_volume, validate_cohomology,
    CochainComplex, CochainError, CohomologyData, TorsionValue,
};
use crate::linalg::Matrix;
use crate::scalar::{Magnitude, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("sequence not exact in degree {degree}: {reason}")]
    NotExact { degree: usize, reason: String },
    #[error("map {map} is not a chain map in degree {degree}")]
    NotChainMap { map: &'static str, degree: usize },
    #[error("incompatible volumes in degree {degree}: {reason}")]
    IncompatibleVolumes { degree: usize, reason: String },
    #[error(transparent)]
    Cochain(#[from] CochainError),
}

/// `0 -> C1 --nu--> C2 --mu--> C3 -> 0`, all with the same number of degrees.
#[derive(Debug, Clone)]
pub struct ShortExactSequence<F> {
    pub c1: CochainComplex<F>,
    pub c2: CochainComplex<F>,
    pub c3: CochainComplex<F>,
    pub nu: Vec<Matrix<F>>,
    pub mu: Vec<Matrix<F>>,
}

fn chain_map_ok<F: Scalar>(
    src: &CochainComplex<F>,
    dst: &CochainComplex<F>,
    maps: &[Matrix<F>],
    j: usize,
    tol: f64,
) -> bool {
    if j + 1 >= src.num_degrees() {
        return true;
    }
    let lhs = dst.d(j).mul(&maps[j]);
    let rhs = maps[j + 1].mul(&src.d(j));
    lhs.approx_eq(&rhs, tol)
}

impl<F: Scalar> ShortExactSequence<F> {
    pub fn new(
        c1: CochainComplex<F>,
        c2: CochainComplex<F>,
        c3: CochainComplex<F>,
        nu: Vec<Matrix<F>>,
        mu: Vec<Matrix<F>>,
        tol: f64,
    ) -> Result<Self, SequenceError> {
        let n = c2.num_degrees();
        if c1.num_degrees() != n || c3.num_degrees() != n || nu.len() != n || mu.len() != n {
            return Err(SequenceError::NotExact {
                degree: 0,
                reason: "complexes and maps must cover the same degrees".into(),
            });
        }
        for j in 0..n {
            let (a, b, c) = (c1.dim(j), c2.dim(j), c3.dim(j));
            if nu[j].rows() != b || nu[j].cols() != a || mu[j].rows() != c || mu[j].cols() != b {
                return Err(SequenceError::NotExact {
                    degree: j,
                    reason: "map shapes do not match dimensions".into(),
                });
            }
            if a + c != b {
                return Err(SequenceError::NotExact {
                    degree: j,
                    reason: format!("dim C1 + dim C3 = {} but dim C2 = {b}", a + c),
                });
            }
            if nu[j].rank(tol) != a {
                return Err(SequenceError::NotExact {
                    degree: j,
                    reason: "nu is not injective".into(),
                });
            }
            if mu[j].rank(tol) != c {
                return Err(SequenceError::NotExact {
                    degree: j,
                    reason: "mu is not surjective".into(),
                });
            }
            let comp = mu[j].mul(&nu[j]);
            if !comp.is_zero(tol * mu[j].max_abs().max(1.0) * nu[j].max_abs().max(1.0)) {
                return Err(SequenceError::NotExact {
                    degree: j,
                    reason: "mu nu != 0".into(),
                });
            }
            if !chain_map_ok(&c1, &c2, &nu, j, tol) {
                return Err(SequenceError::NotChainMap { map: "nu", degree: j });
            }
            if !chain_map_ok(&c2, &c3, &mu, j, tol) {
                return Err(SequenceError::NotChainMap { map: "mu", degree: j });
            }
        }
        Ok(Self { c1, c2, c3, nu, mu })
    }

    pub fn num_degrees(&self) -> usize {
        self.c2.num_degrees()
    }

    /// Compatible volume of `C2`: `nu(v1) | mu`-preimages of `v3`.
    pub fn compatible_volume(
        &self,
        v1: &[Matrix<F>],
        v3: &[Matrix<F>],
        tol: f64,
    ) -> Result<Vec<Matrix<F>>, SequenceError> {
        (0..self.num_degrees())
            .map(|j| {
                let n2 = self.c2.dim(j);
                for (name, v, dim) in [("C1", &v1[j], self.c1.dim(j)), ("C3", &v3[j], self.c3.dim(j))] {
                    if v.rows() != dim || v.cols() != dim || v.rank(tol) != dim {
                        return Err(SequenceError::IncompatibleVolumes {
                            degree: j,
                            reason: format!("volume basis of {name} is not a basis"),
                        });
                    }
                }
                let sub = self.nu[j].mul(&v1[j]);
                let lifts = v3[j]
                    .columns()
                    .iter()
                    .map(|c| {
                        self.mu[j].solve_in_span(c, tol).ok_or_else(|| {
                            SequenceError::IncompatibleVolumes {
                                degree: j,
                                reason: "volume vector of C3 has no preimage".into(),
                            }
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let lifts = Matrix::from_columns(n2, &lifts);
                Ok(Matrix::hstack(n2, &[&sub, &lifts]))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "C1": self.c1.to_json(),
            "C2": self.c2.to_json(),
            "C3": self.c3.to_json(),
            "nu": self.nu.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "mu": self.mu.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, tol: f64) -> Result<Self, SequenceError> {
        let mats = |key: &str| -> Result<Vec<Matrix<F>>, SequenceError> {
            v[key]
                .as_array()
                .ok_or_else(|| CochainError::DimensionMismatch(format!("missing {key}")))?
                .iter()
                .map(|m| Matrix::from_json(m).map_err(|e| CochainError::from(e).into()))
                .collect()
        };
        Self::new(
            CochainComplex::from_json(&v["C1"], tol)?,
            CochainComplex::from_json(&v["C2"], tol)?,
            CochainComplex::from_json(&v["C3"], tol)?,
            mats("nu")?,
            mats("mu")?,
            tol,
        )
    }
}

/// The long exact sequence as a based acyclic complex.
#[derive(Debug, Clone)]
pub struct LongExactSequence<F> {
    pub complex: CochainComplex<F>,
    pub h1: CohomologyData<F>,
    pub h2: CohomologyData<F>,
    pub h3: CohomologyData<F>,
}

impl<F: Scalar> LongExactSequence<F> {
    /// Matrix of the connecting map `H^j(C3) -> H^{j+1}(C1)` in the chosen bases.
    pub fn connecting_map(&self, j: usize) -> Matrix<F> {
        self.complex.d(3 * j + 2)
    }

    pub fn torsion(&self, tol: f64) -> Result<TorsionValue<F::Magnitude>, CochainError> {
        let empty = CohomologyData {
            lifts: (0..self.complex.num_degrees())
                .map(|p| Matrix::zeros(self.complex.dim(p), 0))
                .collect(),
        };
        let t = torsion(&self.complex, &empty, tol)?;
        Ok(TorsionValue::new(
            t.value,
            "long exact sequence as acyclic complex, H^j(C_k) at position 3j+k",
        ))
    }
}

/// Zig-zag connecting map on the class of each lift of `H^j(C3)`.
fn connecting<F: Scalar>(
    s: &ShortExactSequence<F>,
    h1: &CohomologyData<F>,
    h3: &CohomologyData<F>,
    j: usize,
    tol: f64,
) -> Result<Matrix<F>, SequenceError> {
    let rows = h1.dim(j + 1);
    if j + 1 >= s.num_degrees() {
        return Ok(Matrix::zeros(rows, h3.dim(j)));
    }
    let cols = h3.lifts[j]
        .columns()
        .iter()
        .map(|z| {
            let x = s.mu[j].solve_in_span(z, tol).ok_or_else(|| SequenceError::NotExact {
                degree: j,
                reason: "cocycle of C3 has no preimage".into(),
            })?;
            let dx = s.c2.d(j).mul_vec(&x);
            let y = s.nu[j + 1].solve_in_span(&dx, tol).ok_or_else(|| SequenceError::NotExact {
                degree: j + 1,
                reason: "d of the lift is not in the image of nu".into(),
            })?;
            let y = Matrix::from_columns(y.len(), &[y]);
            Ok(class_coordinate_matrix(&s.c1, h1, j + 1, &y, tol)?.column(0))
        })
        .collect::<Result<Vec<_>, SequenceError>>()?;
    Ok(Matrix::from_columns(rows, &cols))
}

fn induced<F: Scalar>(
    src: &CohomologyData<F>,
    dst_complex: &CochainComplex<F>,
    dst: &CohomologyData<F>,
    map: &Matrix<F>,
    j: usize,
    tol: f64,
) -> Result<Matrix<F>, CochainError> {
    if src.dim(j) == 0 {
        return Ok(Matrix::zeros(dst.dim(j), 0));
    }
    class_coordinate_matrix(dst_complex, dst, j, &map.mul(&src.lifts[j]), tol)
}

pub fn long_exact_sequence<F: Scalar>(
    s: &ShortExactSequence<F>,
    tol: f64,
) -> Result<LongExactSequence<F>, SequenceError> {
    let h1 = cohomology(&s.c1, tol);
    let h2 = cohomology(&s.c2, tol);
    let h3 = cohomology(&s.c3, tol);
    long_exact_sequence_with(s, h1, h2, h3, tol)
}

pub fn long_exact_sequence_with<F: Scalar>(
    s: &ShortExactSequence<F>,
    h1: CohomologyData<F>,
    h2: CohomologyData<F>,
    h3: CohomologyData<F>,
    tol: f64,
) -> Result<LongExactSequence<F>, SequenceError> {
    validate_cohomology(&s.c1, &h1, tol)?;
    validate_cohomology(&s.c2, &h2, tol)?;
    validate_cohomology(&s.c3, &h3, tol)?;
    let n = s.num_degrees();
    let mut dims = Vec::with_capacity(3 * n);
    let mut d = Vec::with_capacity(3 * n);
    for j in 0..n {
        dims.extend([h1.dim(j), h2.dim(j), h3.dim(j)]);
        d.push(induced(&h1, &s.c2, &h2, &s.nu[j], j, tol)?);
        d.push(induced(&h2, &s.c3, &h3, &s.mu[j], j, tol)?);
        if j + 1 < n {
            d.push(connecting(s, &h1, &h3, j, tol)?);
        }
    }
    let complex = CochainComplex::new(dims, d, tol).map_err(|e| match e {
        CochainError::NotAComplex { degree, .. } => SequenceError::NotExact {
            degree: degree / 3,
            reason: "long exact sequence fails to be a complex".into(),
        },
        other => other.into(),
    })?;
    let betti = crate::cochain::betti_numbers(&complex, tol);
    if let Some(p) = betti.iter().position(|&b| b != 0) {
        return Err(SequenceError::NotExact {
            degree: p / 3,
            reason: format!("long exact sequence has homology at position {p}"),
        });
    }
    Ok(LongExactSequence { complex, h1, h2, h3 })
}

#[derive(Debug, Clone)]
pub struct MultiplicativityReport<M> {
    pub lhs: TorsionValue<M>,
    pub rhs: TorsionValue<M>,
    pub tau_c1: M,
    pub tau_c3: M,
    pub tau_les: M,
    pub ok: bool,
    pub rel_deviation: f64,
}

impl<M: Magnitude> MultiplicativityReport<M> {
    pub fn to_json(&self) -> Value {
        json!({
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "tau_c1": self.tau_c1.to_json(),
            "tau_c3": self.tau_c3.to_json(),
            "tau_les": self.tau_les.to_json(),
            "ok": self.ok,
            "rel_deviation": self.rel_deviation,
        })
    }
}

/// Compares `tau(C2, V2)` with `tau(C1, V1) tau(C3, V3) tau(LES)` where `V2` is the
/// compatible volume built from `V1` and `V3` (cell bases when `None`).
pub fn multiplicativity_check<F: Scalar>(
    s: &ShortExactSequence<F>,
    volumes: Option<(&[Matrix<F>], &[Matrix<F>])>,
    tol: f64,
) -> Result<MultiplicativityReport<F::Magnitude>, SequenceError> {
    let n = s.num_degrees();
    let id1: Vec<Matrix<F>> = (0..n).map(|j| Matrix::identity(s.c1.dim(j))).collect();
    let id3: Vec<Matrix<F>> = (0..n).map(|j| Matrix::identity(s.c3.dim(j))).collect();
    let (v1, v3) = volumes.unwrap_or((&id1, &id3));
    let v2 = s.compatible_volume(v1, v3, tol)?;
    let les = long_exact_sequence(s, tol)?;
    let t1 = torsion_with_volume(&s.c1, &les.h1, v1, tol)?;
    let t2 = torsion_with_volume(&s.c2, &les.h2, &v2, tol)?;
    let t3 = torsion_with_volume(&s.c3, &les.h3, v3, tol)?;
    let th = les.torsion(tol)?;
    let rhs = t1.value.mul(&t3.value).mul(&th.value);
    let rel_deviation = t2.value.rel_deviation(&rhs);
    let ok = if F::EXACT {
        t2.value == rhs
    } else {
        rel_deviation <= tol.max(crate::scalar::DEFAULT_TOL) * 1e3
    };
    Ok(MultiplicativityReport {
        lhs: t2,
        rhs: TorsionValue::new(rhs, "tau(C1) tau(C3) tau(LES)"),
        tau_c1: t1.value,
        tau_c3: t3.value,
        tau_les: th.value,
        ok,
        rel_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn m(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| q(x, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn zero_complex(n: usize) -> CochainComplex<Rational> {
        CochainComplex::zero_differentials(vec![0; n])
    }

    #[test]
    fn trivial_quotient_gives_isomorphisms() {
        let c = CochainComplex::new(vec![1, 1], vec![m(vec![vec![0]])], 0.0).unwrap();
        let s = ShortExactSequence::new(
            c.clone(),
            c.clone(),
            zero_complex(2),
            vec![Matrix::identity(1), Matrix::identity(1)],
            vec![Matrix::zeros(0, 1), Matrix::zeros(0, 1)],
            0.0,
        )
        .unwrap();
        let les = long_exact_sequence(&s, 0.0).unwrap();
        assert_eq!(les.complex.d(0), Matrix::identity(1));
        let rep = multiplicativity_check(&s, None, 0.0).unwrap();
        assert!(rep.ok);
        assert_eq!(rep.tau_les, q(1, 1));
    }

    #[test]
    fn circle_from_identity_map() {
        // C1 = Q in degree 1, C2 = circle complex with zero differential, C3 = Q in degree 0.
        let c1 = CochainComplex::new(vec![0, 1], vec![Matrix::zeros(1, 0)], 0.0).unwrap();
        let c2 = CochainComplex::new(vec![1, 1], vec![m(vec![vec![0]])], 0.0).unwrap();
        let c3 = CochainComplex::new(vec![1, 0], vec![Matrix::zeros(0, 1)], 0.0).unwrap();
        let s = ShortExactSequence::new(
            c1,
            c2,
            c3,
            vec![Matrix::zeros(1, 0), Matrix::identity(1)],
            vec![Matrix::identity(1), Matrix::zeros(0, 1)],
            0.0,
        )
        .unwrap();
        let les = long_exact_sequence(&s, 0.0).unwrap();
        assert_eq!(les.connecting_map(0), Matrix::zeros(1, 1));
        assert!(multiplicativity_check(&s, None, 0.0).unwrap().ok);
    }

    #[test]
    fn doubling_connecting_map() {
        // C2: Q --2--> Q, sub = degree 1, quotient = degree 0; connecting map is 2.
        let c1 = CochainComplex::new(vec![0, 1], vec![Matrix::zeros(1, 0)], 0.0).unwrap();
        let c2 = CochainComplex::new(vec![1, 1], vec![m(vec![vec![2]])], 0.0).unwrap();
        let c3 = CochainComplex::new(vec![1, 0], vec![Matrix::zeros(0, 1)], 0.0).unwrap();
        let s = ShortExactSequence::new(
            c1,
            c2,
            c3,
            vec![Matrix::zeros(1, 0), Matrix::identity(1)],
            vec![Matrix::identity(1), Matrix::zeros(0, 1)],
            0.0,
        )
        .unwrap();
        let les = long_exact_sequence(&s, 0.0).unwrap();
        assert_eq!(les.connecting_map(0), m(vec![vec![2]]));
        let rep = multiplicativity_check(&s, None, 0.0).unwrap();
        assert_eq!(rep.lhs.value, q(1, 2));
        assert!(rep.ok, "{rep:?}");
    }

    #[test]
    fn rejects_non_exact_maps() {
        let c = CochainComplex::new(vec![1], vec![], 0.0).unwrap();
        let err = ShortExactSequence::new(
            c.clone(),
            CochainComplex::new(vec![2], vec![], 0.0).unwrap(),
            c,
            vec![m(vec![vec![1], vec![0]])],
            vec![m(vec![vec![1, 0]])],
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, SequenceError::NotExact { .. }));
    }
}
