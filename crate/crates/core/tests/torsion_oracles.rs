use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsion_core::cochain::{cohomology, random_invertible, torsion, torsion_choice_independence_check, CochainComplex};
use torsion_core::exact_sequences::{long_exact_sequence, multiplicativity_check};
use torsion_core::mapping_torus::{
    build_mapping_torus, quotient_and_image_dets, torsion_closed_form_finite_order, torsion_closed_form_general,
    torsion_definition, torsion_via_wang, torsion_via_wang_with, wang_sequence, ChainEndomorphism, GeneralChoices,
    InnerProductPairing,
};
use torsion_core::random::{random_complex, random_finite_order_map, random_matrix, random_ses};
use torsion_core::{Magnitude, Matrix, Rational};

#[test]
fn torsion_independent_of_sections_and_lifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let degrees = rng.gen_range(1..=4);
        let c = random_complex::<Rational>(&mut rng, degrees, 5);
        let h = cohomology(&c, 0.0);
        let rep = torsion_choice_independence_check(&c, &h, 10, case, 0.0).unwrap();
        assert!(rep.all_equal, "case {case}: {rep:?}");
    }
}

#[test]
fn basis_change_scales_by_alternating_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let c = random_complex::<Rational>(&mut rng, 3, 5);
        let h = cohomology(&c, 0.0);
        let m: Vec<Matrix<Rational>> = h.dims().iter().map(|&k| random_invertible(&mut rng, k, 3)).collect();
        let base = torsion(&c, &h, 0.0).unwrap().value;
        let moved = torsion(&c, &h.transformed(&m), 0.0).unwrap().value;
        let factor = m
            .iter()
            .enumerate()
            .fold(Rational::from_integer(1.into()), |acc, (j, mj)| {
                Magnitude::mul(&acc, &Magnitude::alternating(&num_traits::Signed::abs(&mj.det().unwrap()), j))
            });
        assert_eq!(moved, Magnitude::mul(&base, &factor));
    }
}

#[test]
fn adding_identity_acyclic_summand_keeps_torsion() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let id = CochainComplex::<Rational>::new(vec![0, 2, 2], vec![Matrix::zeros(2, 0), Matrix::identity(2)], 0.0).unwrap();
    for _ in 0..20 {
        let c = random_complex::<Rational>(&mut rng, 3, 4);
        let sum = c.direct_sum(&id);
        let t1 = torsion(&c, &cohomology(&c, 0.0), 0.0).unwrap().value;
        let t2 = torsion(&sum, &cohomology(&sum, 0.0), 0.0).unwrap().value;
        assert_eq!(t1, t2);
    }
}

#[test]
fn multiplicativity_on_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..80 {
        let degrees = rng.gen_range(1..=4);
        let s = random_ses::<Rational>(&mut rng, degrees, 5);
        let les = long_exact_sequence(&s, 0.0).unwrap();
        assert!(les.complex.num_degrees() == 3 * degrees);
        let rep = multiplicativity_check(&s, None, 0.0).unwrap();
        assert!(rep.ok, "case {case}: {rep:?}");
        let v1: Vec<Matrix<Rational>> = (0..degrees).map(|j| random_invertible(&mut rng, s.c1.dim(j), 2)).collect();
        let v3: Vec<Matrix<Rational>> = (0..degrees).map(|j| random_invertible(&mut rng, s.c3.dim(j), 2)).collect();
        let rep = multiplicativity_check(&s, Some((&v1, &v3)), 0.0).unwrap();
        assert!(rep.ok, "case {case} with volumes: {rep:?}");
    }
}

#[test]
fn oracle_triangle_on_random_finite_order_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..60 {
        let order = rng.gen_range(2..=6);
        let degrees = rng.gen_range(1..=3);
        let f = random_finite_order_map::<Rational>(&mut rng, degrees, 4, order);
        let t = build_mapping_torus(&f, 0.0).unwrap();
        let ht = cohomology(&t.complex, 0.0);
        let def = torsion_definition(&t, &ht, 0.0).unwrap().value;
        let wang = torsion_via_wang(&f, 0.0).unwrap().value;
        let general = torsion_closed_form_general(&f, &GeneralChoices::default(), &InnerProductPairing::default(), 0.0)
            .unwrap()
            .value;
        let finite = torsion_closed_form_finite_order(&f, 0.0).unwrap().value;
        assert_eq!(def, wang, "case {case} definition vs wang");
        assert_eq!(wang, general, "case {case} wang vs general");
        assert_eq!(general, finite, "case {case} general vs finite");
    }
}

#[test]
fn wang_outer_terms_cancel() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let f = random_finite_order_map::<Rational>(&mut rng, 3, 4, 4);
        let t = build_mapping_torus(&f, 0.0).unwrap();
        let s = wang_sequence(&t, 0.0).unwrap();
        let hc = cohomology(&f.base, 0.0);
        let t1 = torsion(&s.c1, &hc.shifted(), 0.0).unwrap().value;
        let t3 = torsion(&s.c3, &hc.padded(s.num_degrees()), 0.0).unwrap().value;
        assert_eq!(Magnitude::mul(&t1, &t3), Rational::from_integer(1.into()));
    }
}

#[test]
fn general_closed_form_on_maps_of_infinite_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut checked = 0;
    while checked < 30 {
        let c = random_complex::<Rational>(&mut rng, 2, 3);
        // chain maps of the normal-form-free complex: scalar multiples and random maps on degree-0 complexes
        let maps: Vec<Matrix<Rational>> = if c.num_degrees() == 1 {
            vec![random_matrix(&mut rng, c.dim(0), c.dim(0), 2)]
        } else {
            let k = Rational::from_integer(rng.gen_range(-2..=3).into());
            c.dims().iter().map(|&n| Matrix::identity(n).scale(&k)).collect()
        };
        let f = ChainEndomorphism::new(c, maps, 0, 0.0).unwrap();
        let wang = torsion_via_wang(&f, 0.0).unwrap().value;
        for pairing in [InnerProductPairing { multiple: 1 }, InnerProductPairing { multiple: 2 }] {
            let general = torsion_closed_form_general(&f, &GeneralChoices::default(), &pairing, 0.0).unwrap().value;
            assert_eq!(wang, general);
        }
        checked += 1;
    }
}

#[test]
fn conjugation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let f = random_finite_order_map::<Rational>(&mut rng, 1, 4, 6);
        // any invertible g is a chain automorphism of a single-degree complex
        let g = vec![random_invertible::<Rational>(&mut rng, f.base.dim(0), 2)];
        let fg = f.conjugated(&g, 0.0).unwrap();
        let t = build_mapping_torus(&f, 0.0).unwrap();
        let tg = build_mapping_torus(&fg, 0.0).unwrap();
        let hc = cohomology(&f.base, 0.0);
        let ht = cohomology(&t.complex, 0.0);
        // transport bases along G = g + g; the volume of T changes by det(G) per degree
        let big: Vec<Matrix<Rational>> = (0..t.complex.num_degrees())
            .map(|i| {
                let top = if i < g.len() { g[i].clone() } else { Matrix::zeros(0, 0) };
                let bottom = if i >= 1 && i - 1 < g.len() { g[i - 1].clone() } else { Matrix::zeros(0, 0) };
                Matrix::block_diag(&top, &bottom)
            })
            .collect();
        let moved_ht = torsion_core::cochain::CohomologyData {
            lifts: ht.lifts.iter().enumerate().map(|(i, l)| if l.cols() == 0 { l.clone() } else { big[i].mul(l) }).collect(),
        };
        let moved_hc = torsion_core::cochain::CohomologyData {
            lifts: hc.lifts.iter().enumerate().map(|(i, l)| if l.cols() == 0 { l.clone() } else { g[i].mul(l) }).collect(),
        };
        let lhs = torsion_via_wang_with(&t, &hc, &ht, 0.0).unwrap().value;
        let rhs = torsion_core::cochain::torsion_with_volume(&tg.complex, &moved_ht, &big, 0.0).unwrap().value;
        assert_eq!(lhs, rhs);
        let rhs_wang = torsion_via_wang_with(&tg, &moved_hc, &moved_ht, 0.0).unwrap().value;
        let vol = big.iter().enumerate().fold(Rational::from_integer(1.into()), |acc, (i, b)| {
            Magnitude::mul(&acc, &Magnitude::alternating(&num_traits::Signed::abs(&b.det().unwrap()), i))
        });
        assert_eq!(rhs_wang, Magnitude::mul(&lhs, &vol));
    }
}

#[test]
fn quotient_and_image_dets_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut defined = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let r = rng.gen_range(0..=n);
        let a: Matrix<Rational> = random_matrix(&mut rng, n, r, 2);
        let b: Matrix<Rational> = random_matrix(&mut rng, r, n, 2);
        let u = a.mul(&b);
        if let Some((bar, hat)) = quotient_and_image_dets(&u, 0.0).unwrap() {
            assert_eq!(bar, hat);
            defined += 1;
        }
    }
    assert!(defined > 50);
}
