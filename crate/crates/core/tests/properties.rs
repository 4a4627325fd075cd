use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torsion_core::asymptotics::{leading_term_rho, leading_term_sf, random_component, LeadingOrderTerm};
use torsion_core::cochain::{cohomology, torsion_choice_independence_check};
use torsion_core::exact_sequences::multiplicativity_check;
use torsion_core::random::{random_complex, random_matrix, random_ses};
use torsion_core::spectral_invariants::{
    framing_identity_check, integrand_identity_check, phase_identity_check, rho_finite_order, spectral_flow,
    EigenPhaseData, SpectralFlowInput,
};
use torsion_core::{Matrix, Phase, Rational};

fn phase_vec(max_len: usize) -> impl Strategy<Value = Vec<Phase>> {
    prop::collection::vec((2i64..=12).prop_flat_map(|m| (0..m, Just(m))), 0..max_len)
        .prop_map(|v| v.into_iter().map(|(j, m)| Phase::new(j, m)).collect())
}

fn nonzero_phase_vec(max_len: usize) -> impl Strategy<Value = Vec<Phase>> {
    prop::collection::vec((2i64..=12).prop_flat_map(|m| (1..m, Just(m))), 1..max_len)
        .prop_map(|v| v.into_iter().map(|(j, m)| Phase::new(j, m)).collect())
}

fn dim_g() -> impl Strategy<Value = usize> {
    (2usize..=4).prop_map(|n| n * n - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torsion_independent_of_choices(seed in any::<u64>(), degrees in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_complex::<Rational>(&mut rng, degrees, 4);
        let h = cohomology(&c, 0.0);
        let rep = torsion_choice_independence_check(&c, &h, 4, seed ^ 0x5eed, 0.0).unwrap();
        prop_assert!(rep.all_equal);
    }

    #[test]
    fn torsion_multiplicative_on_sequences(seed in any::<u64>(), degrees in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_ses::<Rational>(&mut rng, degrees, 4);
        prop_assert!(multiplicativity_check(&s, None, 0.0).unwrap().ok);
    }

    #[test]
    fn rank_nullity(seed in any::<u64>(), rows in 0usize..6, cols in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Matrix<Rational> = random_matrix(&mut rng, rows, cols, 3);
        prop_assert_eq!(m.rank(0.0) + m.kernel(0.0).cols(), cols);
    }

    #[test]
    fn det_multiplicative(seed in any::<u64>(), n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Matrix<Rational> = random_matrix(&mut rng, n, n, 4);
        let b: Matrix<Rational> = random_matrix(&mut rng, n, n, 4);
        prop_assert_eq!(a.mul(&b).det().unwrap(), a.det().unwrap() * b.det().unwrap());
    }

    #[test]
    fn rho_additive(m1 in phase_vec(5), h1 in phase_vec(4), m2 in phase_vec(5), h2 in phase_vec(4), g in dim_g()) {
        let a = EigenPhaseData::new(m1, h1, g);
        let b = EigenPhaseData::new(m2, h2, g);
        let sum = rho_finite_order(&a).rho + rho_finite_order(&b).rho;
        prop_assert_eq!(rho_finite_order(&a.union(&b)).rho, sum);
    }

    #[test]
    fn rho_permutation_invariant(m in phase_vec(6), h in phase_vec(5), g in dim_g()) {
        let fwd = rho_finite_order(&EigenPhaseData::new(m.clone(), h.clone(), g));
        let (mut mr, mut hr) = (m, h);
        mr.reverse();
        let half = hr.len() / 2;
        hr.rotate_left(half);
        prop_assert_eq!(fwd, rho_finite_order(&EigenPhaseData::new(mr, hr, g)));
    }

    #[test]
    fn rho_is_eta_difference(m in phase_vec(6), h in phase_vec(5), g in dim_g()) {
        let r = rho_finite_order(&EigenPhaseData::new(m, h, g));
        prop_assert_eq!(r.rho, r.eta_a - r.eta_theta);
    }

    #[test]
    fn phase_identity_all_roots(m in 2i64..=24, j in 1i64..24) {
        prop_assume!(j < m);
        prop_assert!(phase_identity_check(Rational64::new(j, m)).unwrap().deviation < 1e-12);
    }

    #[test]
    fn integrand_identity(phases in nonzero_phase_vec(8)) {
        prop_assert!(integrand_identity_check(&phases).deviation < 1e-10);
    }

    #[test]
    fn framing_deviation_matches_obstruction(h in phase_vec(6), g in dim_g()) {
        let f = framing_identity_check(&h, g);
        prop_assert_eq!(f.deviation < 1e-10, f.holds_exactly());
    }

    #[test]
    fn spectral_flow_lift_shift(cs in -20i64..20, den in 1i64..7, shift in -3i64..3, h in 2usize..5) {
        let g = h * h - 1;
        let input = |lift: Rational64| SpectralFlowInput {
            cs_lift: lift,
            rho: Rational64::new(1, 3),
            h,
            dim_g: g,
            b1: 1,
            dim_h0: 0,
            dim_h1: 2,
        };
        let base = Rational64::new(cs, den);
        let a = spectral_flow(&input(base)).value;
        let b = spectral_flow(&input(base + shift)).value;
        prop_assert_eq!(b - a, Rational64::from_integer(-4 * h as i64 * shift));
    }

    #[test]
    fn forms_agree_and_ignore_lift(seed in any::<u64>(), n in 2usize..=4, order in 2i64..=12, shift in -3i64..=3, k in 1u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_component(&mut rng, n, order);
        let rho = leading_term_rho(std::slice::from_ref(&c)).unwrap().value_at(k);
        let sf = leading_term_sf(std::slice::from_ref(&c)).unwrap().value_at(k);
        let shifted = leading_term_sf(&[c.with_cs_shift(shift)]).unwrap().value_at(k);
        let scale = rho.norm().max(1.0);
        prop_assert!((rho - sf).norm() / scale < 1e-10);
        prop_assert!((sf - shifted).norm() / scale < 1e-10);
    }

    #[test]
    fn leading_term_linear(seed in any::<u64>(), k in 0u64..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_component(&mut rng, 2, 6);
        let b = random_component(&mut rng, 3, 4);
        let ta = leading_term_rho(std::slice::from_ref(&a)).unwrap();
        let tb = leading_term_rho(std::slice::from_ref(&b)).unwrap();
        let both: LeadingOrderTerm = ta.union(&tb);
        prop_assert!((both.value_at(k) - ta.value_at(k) - tb.value_at(k)).norm() < 1e-10);
    }
}
