//! Seeded generators of random complexes, short exact sequences and
//! finite-order chain endomorphisms with small integer entries.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cochain::{random_invertible, CochainComplex};
use crate::exact_sequences::ShortExactSequence;
use crate::linalg::Matrix;
use crate::mapping_torus::ChainEndomorphism;
use crate::scalar::Scalar;

pub fn random_matrix<F: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, range: i64) -> Matrix<F> {
    Matrix::from_fn(rows, cols, |_, _| F::from_i64(rng.gen_range(-range..=range)))
}

/// Shape of a complex in normal form: `C^j = B_j + H_j + S_j` with `d` mapping `S_j` onto `B_{j+1}`.
#[derive(Debug, Clone)]
struct Shape {
    ranks: Vec<usize>,
    betti: Vec<usize>,
}

impl Shape {
    fn dim(&self, j: usize) -> usize {
        let b = if j == 0 { 0 } else { self.ranks[j - 1] };
        b + self.betti[j] + self.ranks[j]
    }

    fn random(rng: &mut ChaCha8Rng, degrees: usize, max_dim: usize) -> Self {
        let mut ranks = vec![0; degrees];
        let mut betti = vec![0; degrees];
        let mut incoming = 0;
        for j in 0..degrees {
            let room = max_dim - incoming;
            let r = if j + 1 < degrees { rng.gen_range(0..=room.min(2)) } else { 0 };
            let b = rng.gen_range(0..=(room - r).min(2));
            ranks[j] = r;
            betti[j] = b;
            incoming = r;
        }
        Shape { ranks, betti }
    }
}

/// Random complex with `degrees` degrees and dimensions at most `max_dim`,
/// built in normal form and conjugated by random invertible matrices.
pub fn random_complex<F: Scalar>(rng: &mut ChaCha8Rng, degrees: usize, max_dim: usize) -> CochainComplex<F> {
    let shape = Shape::random(rng, degrees, max_dim);
    let normal: Vec<Matrix<F>> = (0..degrees.saturating_sub(1))
        .map(|j| {
            let (src, dst) = (shape.dim(j), shape.dim(j + 1));
            let r = shape.ranks[j];
            let block = random_invertible::<F>(rng, r, 3);
            let mut m = Matrix::zeros(dst, src);
            for a in 0..r {
                for b in 0..r {
                    m.set(a, src - r + b, block.get(a, b).clone());
                }
            }
            m
        })
        .collect();
    let p: Vec<Matrix<F>> = (0..degrees)
        .map(|j| random_invertible::<F>(rng, shape.dim(j), 2))
        .collect();
    let d = (0..degrees.saturating_sub(1))
        .map(|j| {
            let pinv = p[j].inverse(0.0).expect("invertible by construction");
            p[j + 1].mul(&normal[j]).mul(&pinv)
        })
        .collect();
    CochainComplex::new((0..degrees).map(|j| shape.dim(j)).collect(), d, 0.0)
        .expect("normal form is a complex")
}

/// Random short exact sequence: `C1` is the subcomplex generated by random
/// cochains of `C2` and their coboundaries, `C3` the quotient presented on a
/// complement spanned by standard vectors.
pub fn random_ses<F: Scalar>(rng: &mut ChaCha8Rng, degrees: usize, max_dim: usize) -> ShortExactSequence<F> {
    let c2 = random_complex::<F>(rng, degrees, max_dim);
    let n = c2.num_degrees();
    let gens: Vec<Matrix<F>> = (0..n)
        .map(|j| {
            let k = rng.gen_range(0..=c2.dim(j).min(2));
            random_matrix::<F>(rng, c2.dim(j), k, 2)
        })
        .collect();
    let sub: Vec<Matrix<F>> = (0..n)
        .map(|j| {
            let dim = c2.dim(j);
            let incoming = if j == 0 {
                Matrix::zeros(dim, 0)
            } else {
                c2.d(j - 1).mul(&gens[j - 1])
            };
            Matrix::hstack(dim, &[&gens[j], &incoming]).rank_kernel_image(0.0).image
        })
        .collect();
    let comp: Vec<Matrix<F>> = sub.iter().map(|v| v.complement(0.0)).collect();
    let coords: Vec<Matrix<F>> = (0..n)
        .map(|j| {
            Matrix::hstack(c2.dim(j), &[&sub[j], &comp[j]])
                .inverse(0.0)
                .expect("basis by construction")
        })
        .collect();
    let mu: Vec<Matrix<F>> = (0..n)
        .map(|j| {
            let k = sub[j].cols();
            let rows: Vec<usize> = (k..c2.dim(j)).collect();
            coords[j].transpose().select_columns(&rows).transpose()
        })
        .collect();
    let d1 = (0..n - 1)
        .map(|j| {
            let k = sub[j + 1].cols();
            let img = coords[j + 1].mul(&c2.d(j)).mul(&sub[j]);
            Matrix::from_fn(k, sub[j].cols(), |a, b| img.get(a, b).clone())
        })
        .collect();
    let d3 = (0..n - 1).map(|j| mu[j + 1].mul(&c2.d(j)).mul(&comp[j])).collect();
    let c1 = CochainComplex::new(sub.iter().map(Matrix::cols).collect(), d1, 0.0).expect("subcomplex");
    let c3 = CochainComplex::new(comp.iter().map(Matrix::cols).collect(), d3, 0.0).expect("quotient");
    ShortExactSequence::new(c1, c2, c3, sub, mu, 0.0).expect("exact by construction")
}

/// Companion matrix of the `k`-th cyclotomic polynomial for `k` in `1..=6`.
pub fn cyclotomic_companion<F: Scalar>(k: u32) -> Matrix<F> {
    let coeffs: &[i64] = match k {
        1 => &[-1],
        2 => &[1],
        3 => &[1, 1],
        4 => &[1, 0],
        5 => &[1, 1, 1, 1],
        6 => &[1, -1],
        _ => panic!("cyclotomic companion only for orders 1..=6"),
    };
    // x^n + c_{n-1} x^{n-1} + ... + c_0, coeffs listed from c_0.
    let n = coeffs.len();
    Matrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            F::from_i64(-coeffs[i])
        } else if i == j + 1 {
            F::one()
        } else {
            F::zero()
        }
    })
}

fn random_finite_order_block<F: Scalar>(rng: &mut ChaCha8Rng, dim: usize, order: u32) -> Matrix<F> {
    let divisors: Vec<u32> = (1..=order).filter(|d| order.is_multiple_of(*d)).collect();
    let mut blocks: Vec<Matrix<F>> = Vec::new();
    let mut filled = 0;
    while filled < dim {
        let choices: Vec<u32> = divisors
            .iter()
            .copied()
            .filter(|&d| cyclotomic_companion::<F>(d).rows() <= dim - filled)
            .collect();
        let d = choices[rng.gen_range(0..choices.len())];
        let b = cyclotomic_companion::<F>(d);
        filled += b.rows();
        blocks.push(b);
    }
    blocks
        .iter()
        .fold(Matrix::zeros(0, 0), |acc, b| Matrix::block_diag(&acc, b))
}

/// Random chain endomorphism with `f^order = id` on a random complex in normal form.
///
/// `f` acts on `H_j` and `S_j` by random finite-order blocks and on `B_{j+1}` by
/// the conjugate of its action on `S_j`, then everything is conjugated by random
/// invertible matrices.
pub fn random_finite_order_map<F: Scalar>(
    rng: &mut ChaCha8Rng,
    degrees: usize,
    max_dim: usize,
    order: u32,
) -> ChainEndomorphism<F> {
    let shape = Shape::random(rng, degrees, max_dim);
    let dsn: Vec<Matrix<F>> = (0..degrees)
        .map(|j| random_invertible::<F>(rng, shape.ranks[j], 2))
        .collect();
    let on_s: Vec<Matrix<F>> = (0..degrees)
        .map(|j| random_finite_order_block::<F>(rng, shape.ranks[j], order))
        .collect();
    let on_h: Vec<Matrix<F>> = (0..degrees)
        .map(|j| random_finite_order_block::<F>(rng, shape.betti[j], order))
        .collect();
    let normal_d: Vec<Matrix<F>> = (0..degrees.saturating_sub(1))
        .map(|j| {
            let (src, dst) = (shape.dim(j), shape.dim(j + 1));
            let r = shape.ranks[j];
            let mut m = Matrix::zeros(dst, src);
            for a in 0..r {
                for b in 0..r {
                    m.set(a, src - r + b, dsn[j].get(a, b).clone());
                }
            }
            m
        })
        .collect();
    let normal_f: Vec<Matrix<F>> = (0..degrees)
        .map(|j| {
            let on_b = if j == 0 {
                Matrix::zeros(0, 0)
            } else {
                let r = &dsn[j - 1];
                r.mul(&on_s[j - 1]).mul(&r.inverse(0.0).expect("invertible"))
            };
            Matrix::block_diag(&Matrix::block_diag(&on_b, &on_h[j]), &on_s[j])
        })
        .collect();
    let p: Vec<Matrix<F>> = (0..degrees)
        .map(|j| random_invertible::<F>(rng, shape.dim(j), 2))
        .collect();
    let pinv: Vec<Matrix<F>> = p.iter().map(|m| m.inverse(0.0).expect("invertible")).collect();
    let d = (0..degrees.saturating_sub(1))
        .map(|j| p[j + 1].mul(&normal_d[j]).mul(&pinv[j]))
        .collect();
    let f = (0..degrees).map(|j| p[j].mul(&normal_f[j]).mul(&pinv[j])).collect();
    let c = CochainComplex::new((0..degrees).map(|j| shape.dim(j)).collect(), d, 0.0).expect("complex");
    ChainEndomorphism::new(c, f, order, 0.0).expect("finite-order chain map by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::SeedableRng;

    #[test]
    fn companions_have_expected_order() {
        for k in 1..=6u32 {
            let c = cyclotomic_companion::<Rational>(k);
            assert_eq!(c.pow(k), Matrix::identity(c.rows()), "order {k}");
            for j in 1..k {
                assert_ne!(c.pow(j), Matrix::identity(c.rows()), "order {k} power {j}");
            }
        }
    }

    #[test]
    fn generators_respect_size_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_complex::<Rational>(&mut rng, 4, 5);
            assert!(c.dims().iter().all(|&d| d <= 5));
            let s = random_ses::<Rational>(&mut rng, 3, 5);
            assert_eq!(s.num_degrees(), 3);
        }
    }
}
