//! Acceptance criteria, one PASS/FAIL line each. Run with `--nocapture` to see the table.

use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsion_core::asymptotics::{identification_check, leading_term_rho, leading_term_sf, random_component};
use torsion_core::cochain::{betti_numbers, cohomology, torsion_choice_independence_check, CochainComplex};
use torsion_core::exact_sequences::multiplicativity_check;
use torsion_core::lie_algebra::{chern_relation_check, dual_coxeter_identity_check, LieData};
use torsion_core::mapping_torus::{
    build_mapping_torus, torsion_closed_form_finite_order, torsion_closed_form_general, torsion_definition,
    torsion_via_wang, ChainEndomorphism, GeneralChoices, InnerProductPairing,
};
use torsion_core::random::{cyclotomic_companion, random_complex, random_finite_order_map, random_ses};
use torsion_core::scalar::q;
use torsion_core::spectral_invariants::{
    framing_identity_check, integrand_identity_check, phase_identity_check, rho_finite_order, spectral_flow,
    EigenPhaseData, SpectralFlowInput,
};
use torsion_core::surface_rep::fixtures::irreducible_genus2_su2;
use torsion_core::surface_rep::{omega_property, symplectic_form, twisted_complex, SurfaceRepresentation};
use torsion_core::{Matrix, Phase, Rational};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed.as_secs_f64() < limit_s as f64
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut failures = 0;
    for case in 0..200u64 {
        let degrees = rng.gen_range(1..=3);
        let c = random_complex::<Rational>(&mut rng, degrees, 5);
        let h = cohomology(&c, 0.0);
        let rep = torsion_choice_independence_check(&c, &h, 20, case, 0.0).unwrap();
        if !rep.all_equal {
            failures += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && within(t, 30),
        format!("200 complexes x 20 choices, {failures} mismatches, {:.2}s", t.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut failures = 0;
    for _ in 0..200 {
        let degrees = rng.gen_range(1..=3);
        let s = random_ses::<Rational>(&mut rng, degrees, 5);
        if !multiplicativity_check(&s, None, 0.0).unwrap().ok {
            failures += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && within(t, 60),
        format!("200 sequences, {failures} failures, {:.2}s", t.as_secs_f64()),
    )
}

fn routes(f: &ChainEndomorphism<Rational>) -> [Rational; 4] {
    let t = build_mapping_torus(f, 0.0).unwrap();
    let ht = cohomology(&t.complex, 0.0);
    [
        torsion_definition(&t, &ht, 0.0).unwrap().value,
        torsion_via_wang(f, 0.0).unwrap().value,
        torsion_closed_form_general(f, &GeneralChoices::default(), &InnerProductPairing::default(), 0.0)
            .unwrap()
            .value,
        torsion_closed_form_finite_order(f, 0.0).unwrap().value,
    ]
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut failures = 0;
    for _ in 0..100 {
        let order = rng.gen_range(2..=6);
        let degrees = rng.gen_range(1..=3);
        let f = random_finite_order_map::<Rational>(&mut rng, degrees, 4, order);
        let r = routes(&f);
        if !r.iter().all(|x| *x == r[0]) {
            failures += 1;
        }
    }
    let point = |m: Matrix<Rational>, order| {
        let c = CochainComplex::new(vec![m.rows()], vec![], 0.0).unwrap();
        ChainEndomorphism::new(c, vec![m], order, 0.0).unwrap()
    };
    let minus = routes(&point(Matrix::identity(1).neg(), 2));
    let third = routes(&point(cyclotomic_companion(3), 3));
    let circles = minus.iter().all(|x| *x == q(1, 2)) && third.iter().all(|x| *x == q(1, 3));
    outcome(
        failures == 0 && circles,
        format!("100 maps, {failures} disagreements; circle f=-1 -> 1/2, third turn -> 1/3: {circles}"),
    )
}

fn criterion_4() -> Outcome {
    let tol = 1e-9;
    let irr = irreducible_genus2_su2();
    let b_irr = betti_numbers(&twisted_complex(&irr, tol).unwrap(), tol);
    let triv = SurfaceRepresentation::trivial(2, LieData::su(2).unwrap());
    let b_triv = betti_numbers(&twisted_complex(&triv, tol).unwrap(), tol);
    let o = symplectic_form(&irr, tol).unwrap();
    let p = omega_property(&o.matrix, 1e-12).unwrap();
    let theta_dev = (p.theta_value - num_complex::Complex64::new(1.0, 0.0)).norm();
    let ok = b_irr == vec![0, 6, 0]
        && b_triv == vec![3, 12, 3]
        && o.antisymmetry_deviation < 1e-8
        && o.matrix.rank(1e-9) == 6
        && theta_dev < 1e-8;
    outcome(
        ok,
        format!(
            "irreducible {b_irr:?}, trivial {b_triv:?}, antisymmetry {:.1e}, |Theta - 1| = {theta_dev:.1e}",
            o.antisymmetry_deviation
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=4 {
        let dc = dual_coxeter_identity_check(n, 100, 1005 + n as u64).unwrap();
        let ch = chern_relation_check(n, 10, 2005 + n as u64).unwrap();
        let cas = LieData::su(n).unwrap().casimir_eigenvalue(1.0, 1e-10).unwrap();
        ok &= dc.max_deviation < 1e-10 && ch.passed && cas.scalar_deviation < 1e-10;
        parts.push(format!(
            "su{n}: {:.1e}/{:.1e}/{:.1e}",
            dc.max_deviation, cas.scalar_deviation, ch.max_deviation
        ));
    }
    outcome(ok, format!("ad-trace / casimir / chern deviations {}", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut worst = 0f64;
    for m in 2..=24i64 {
        for j in 1..m {
            worst = worst.max(phase_identity_check(Rational64::new(j, m)).unwrap().deviation);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut worst_integrand = 0f64;
    for _ in 0..100 {
        let order = rng.gen_range(2..=24);
        let len = rng.gen_range(1..=8);
        let phases: Vec<Phase> = (0..len).map(|_| Phase::new(rng.gen_range(1..order), order)).collect();
        worst_integrand = worst_integrand.max(integrand_identity_check(&phases).deviation);
    }
    outcome(
        worst < 1e-12 && worst_integrand < 1e-10,
        format!("phase identity {worst:.1e}, integrand {worst_integrand:.1e}"),
    )
}

fn random_h10(rng: &mut ChaCha8Rng) -> (Vec<Phase>, usize) {
    let n = rng.gen_range(2..=4usize);
    let order = rng.gen_range(2..=12);
    let len = rng.gen_range(1..=6);
    ((0..len).map(|_| Phase::new(rng.gen_range(0..order), order)).collect(), n * n - 1)
}

fn criterion_7() -> Outcome {
    let id = EigenPhaseData::new(vec![Phase::zero(); 6], vec![Phase::zero(); 2], 3);
    let rho_id = rho_finite_order(&id).rho == Rational64::from_integer(0);
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut decomposition = true;
    let (mut framing_ok, mut worst) = (0, 0f64);
    let mut obstruction_predicts = true;
    for _ in 0..50 {
        let (h10, dim_g) = random_h10(&mut rng);
        let moduli: Vec<Phase> = (0..rng.gen_range(0..5)).map(|_| Phase::new(rng.gen_range(0..6), 6)).collect();
        let r = rho_finite_order(&EigenPhaseData::new(moduli, h10.clone(), dim_g));
        decomposition &= r.rho == r.eta_a - r.eta_theta;
        let f = framing_identity_check(&h10, dim_g);
        worst = worst.max(f.deviation);
        if f.deviation < 1e-10 {
            framing_ok += 1;
        }
        obstruction_predicts &= (f.deviation < 1e-10) == f.holds_exactly();
    }
    let sf = spectral_flow(&SpectralFlowInput {
        cs_lift: Rational64::from_integer(0),
        rho: Rational64::from_integer(0),
        h: 2,
        dim_g: 3,
        b1: 1,
        dim_h0: 3,
        dim_h1: 3,
    });
    let sf_ok = sf.value == Rational64::from_integer(0) && sf.integral;
    outcome(
        rho_id && decomposition && framing_ok == 50 && sf_ok,
        format!(
            "rho(id)=0: {rho_id}; eta decomposition: {decomposition}; framing identity {framing_ok}/50 \
             (worst {worst:.2}, failures exactly where dimG(n+ - n-)/2 is odd: {obstruction_predicts}); SF(theta)=0: {sf_ok}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let components: Vec<_> = (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let order = rng.gen_range(2..=12);
            random_component(&mut rng, n, order)
        })
        .collect();
    let mut worst = 0f64;
    for c in &components {
        let rho = leading_term_rho(std::slice::from_ref(c)).unwrap();
        let sf = leading_term_sf(std::slice::from_ref(c)).unwrap();
        for k in [10, 100, 1000] {
            let scale = rho.value_at(k).norm().max(1.0);
            worst = worst.max((rho.value_at(k) - sf.value_at(k)).norm() / scale);
        }
    }
    let mut decaying = 0;
    let mut vanishing = 0;
    for c in &components {
        let r = identification_check(c, 100).unwrap();
        if r.gap < 1e-12 && r.gap_2k < 1e-12 {
            vanishing += 1;
        } else if (r.decay_ratio - 2.0).abs() < 0.1 {
            decaying += 1;
        }
    }
    let ok = worst < 1e-10 && decaying + vanishing == components.len();
    outcome(
        ok,
        format!(
            "form deviation {worst:.1e} on 50 summaries; gap ratio 2 +- 0.1 on {decaying}, identically zero on {vanishing}, \
             stalled on {}",
            components.len() - decaying - vanishing
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_torsion");
    let run = || Command::new(bin).args(["--seed", "9", "verify"]).output().unwrap();
    let (a, b) = (run(), run());
    let t = start.elapsed();
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && within(t, 300);
    outcome(
        ok,
        format!(
            "exit {:?}/{:?}, identical reports: {}, {:.2}s",
            a.status.code(),
            b.status.code(),
            a.stdout == b.stdout,
            t.as_secs_f64()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 torsion well-definedness", criterion_1),
        ("2 multiplicativity", criterion_2),
        ("3 mapping-torus oracle triangle", criterion_3),
        ("4 surface twisted cohomology", criterion_4),
        ("5 Lie identities", criterion_5),
        ("6 phase identities", criterion_6),
        ("7 rho/framing/spectral flow", criterion_7),
        ("8 form equivalence and identification", criterion_8),
        ("9 CLI determinism", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let o = run();
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
