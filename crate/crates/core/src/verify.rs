//! Verification suite over the shipped fixtures plus seeded random families.
//!
//! The manifest `fixtures/manifest.json` lists entries
//! `{name, kind, family, path, expected, source}`. Every check yields one
//! line of the JSON report; the report contains no timings, so identical seeds
//! give byte-identical output.

use std::path::{Path, PathBuf};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::asymptotics::{
    components_from_json, identification_check, leading_term_rho, leading_term_sf, random_component, ComponentSummary,
};
use crate::cochain::{betti_numbers, cohomology, torsion, torsion_choice_independence_check, CochainComplex};
use crate::error::Error;
use crate::exact_sequences::{multiplicativity_check, ShortExactSequence};
use crate::lie_algebra::{chern_relation_check, dual_coxeter_identity_check, LieData};
use crate::mapping_torus::{
    build_mapping_torus, torsion_closed_form_finite_order, torsion_closed_form_general, torsion_definition,
    torsion_via_wang, ChainEndomorphism, GeneralChoices, InnerProductPairing,
};
use crate::phase::Phase;
use crate::random::{random_complex, random_finite_order_map, random_ses};
use crate::scalar::{parse_rational, Rational};
use crate::spectral_invariants::{
    framing_identity_check, integrand_identity_check, phase_identity_check, rho_finite_order, spectral_flow,
    EigenPhaseData, SpectralFlowInput,
};
use crate::surface_rep::{automorphism_report, omega_property, symplectic_form, twisted_complex, SurfaceAutomorphismData, SurfaceRepresentation};

pub const REPORT_VERSION: u32 = 1;

pub const FAMILIES: [&str; 10] = [
    "torsion",
    "multiplicativity",
    "wang-triangle",
    "omega",
    "lie",
    "phase-identities",
    "rho",
    "spectral-flow",
    "forms",
    "identification",
];

pub const SOURCE_TAGS: [&str; 3] = ["inspection", "oracle", "reference"];

pub fn default_fixtures_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub fixtures_dir: PathBuf,
    pub filter: Option<String>,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            fixtures_dir: default_fixtures_dir(),
            filter: None,
            seed: 0,
            tol: crate::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureEntry {
    pub name: String,
    pub kind: String,
    pub family: String,
    pub path: String,
    pub expected: Value,
    pub source: String,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    fn failed(name: &str, err: Error) -> Self {
        Self::new(name, false, err.in_fixture(name).to_json())
    }
}

#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub family: String,
    pub checks: Vec<Check>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub tol: f64,
    pub filter: Option<String>,
    pub families: Vec<FamilyReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyReport::passed)
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.families
            .iter()
            .flat_map(|f| f.checks.iter().map(move |c| (f.family.as_str(), c)))
    }

    pub fn to_json(&self) -> Value {
        let total = self.checks().count();
        let failed = self.checks().filter(|(_, c)| !c.passed).count();
        json!({
            "version": REPORT_VERSION,
            "seed": self.seed,
            "tol": self.tol,
            "filter": self.filter,
            "passed": self.passed(),
            "total": total,
            "failed": failed,
            "families": self.families.iter().map(|f| json!({
                "family": f.family,
                "passed": f.passed(),
                "checks": f.checks.iter().map(|c| json!({
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn load_manifest(dir: &Path) -> Result<Vec<FixtureEntry>, Error> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|_| Error::FixtureNotFound(path.display().to_string()))?;
    let v: Value = serde_json::from_str(&text)?;
    let list = v["fixtures"]
        .as_array()
        .ok_or_else(|| Error::Input("manifest lacks a fixtures array".into()))?;
    list.iter()
        .map(|e| {
            let s = |k: &str| e[k].as_str().map(str::to_string);
            let name = s("name").ok_or_else(|| Error::Input("manifest entry without name".into()))?;
            let source = s("source").unwrap_or_default();
            if !SOURCE_TAGS.contains(&source.as_str()) {
                return Err(Error::Input(format!("fixture {name} has no recognised source tag")));
            }
            Ok(FixtureEntry {
                kind: s("kind").unwrap_or_default(),
                family: s("family").unwrap_or_default(),
                path: s("path").unwrap_or_default(),
                expected: e["expected"].clone(),
                source,
                name,
            })
        })
        .collect()
}

fn read_fixture(dir: &Path, e: &FixtureEntry) -> Result<Value, Error> {
    let p = dir.join(&e.path);
    let text = std::fs::read_to_string(&p).map_err(|_| Error::FixtureNotFound(p.display().to_string()))?;
    Ok(serde_json::from_str(&text)?)
}

fn expected_rational(e: &FixtureEntry, key: &str) -> Result<Option<Rational>, Error> {
    match e.expected[key].as_str() {
        Some(s) => parse_rational(s).map(Some).map_err(Error::Input),
        None => Ok(None),
    }
}

fn expected_r64(e: &FixtureEntry, key: &str) -> Result<Option<Rational64>, Error> {
    e.expected[key].as_str().map(parse_r64).transpose()
}

fn family_seed(seed: u64, family: &str) -> u64 {
    let idx = FAMILIES.iter().position(|f| *f == family).unwrap_or(0) as u64;
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(idx)
}

pub fn run_verify_suite(opts: &VerifyOptions) -> Result<VerifyReport, Error> {
    let manifest = load_manifest(&opts.fixtures_dir)?;
    let selected: Vec<&str> = FAMILIES
        .iter()
        .copied()
        .filter(|f| match &opts.filter {
            None => true,
            Some(p) => f.contains(p.as_str()) || manifest.iter().any(|e| e.family == *f && e.name.contains(p.as_str())),
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::FixtureNotFound(opts.filter.clone().unwrap_or_default()));
    }
    let families = selected
        .par_iter()
        .map(|family| {
            let entries: Vec<&FixtureEntry> = manifest
                .iter()
                .filter(|e| e.family == *family)
                .filter(|e| match &opts.filter {
                    Some(p) if !family.contains(p.as_str()) => e.name.contains(p.as_str()),
                    _ => true,
                })
                .collect();
            let only_fixtures = matches!(&opts.filter, Some(p) if !family.contains(p.as_str()));
            let checks = run_family(family, &entries, only_fixtures, opts);
            FamilyReport {
                family: family.to_string(),
                checks,
            }
        })
        .collect();
    Ok(VerifyReport {
        seed: opts.seed,
        tol: opts.tol,
        filter: opts.filter.clone(),
        families,
    })
}

fn run_family(family: &str, entries: &[&FixtureEntry], only_fixtures: bool, opts: &VerifyOptions) -> Vec<Check> {
    let dir = &opts.fixtures_dir;
    let mut checks: Vec<Check> = entries
        .iter()
        .map(|e| match read_fixture(dir, e).and_then(|v| fixture_check(family, e, &v, opts)) {
            Ok(c) => c,
            Err(err) => Check::failed(&e.name, err),
        })
        .collect();
    if !only_fixtures {
        let mut rng = ChaCha8Rng::seed_from_u64(family_seed(opts.seed, family));
        checks.extend(random_checks(family, &mut rng, opts));
    }
    checks
}

fn fixture_check(family: &str, e: &FixtureEntry, v: &Value, opts: &VerifyOptions) -> Result<Check, Error> {
    match family {
        "torsion" => check_torsion_fixture(e, v, opts),
        "multiplicativity" => {
            let s = ShortExactSequence::<Rational>::from_json(v, 0.0)?;
            let r = multiplicativity_check(&s, None, 0.0)?;
            Ok(Check::new(&e.name, r.ok, r.to_json()))
        }
        "wang-triangle" => check_mapping_torus_fixture(e, v),
        "omega" => check_surface_fixture(e, v, opts),
        "rho" => check_phase_fixture(e, v),
        "spectral-flow" => check_sf_fixture(e, v),
        "forms" => {
            let cs = components_from_json(v)?;
            Ok(forms_check(&e.name, &cs))
        }
        "identification" => check_identification_fixture(e, v),
        other => Err(Error::Input(format!("family {other} takes no fixtures"))),
    }
}

fn check_torsion_fixture(e: &FixtureEntry, v: &Value, opts: &VerifyOptions) -> Result<Check, Error> {
    let c = CochainComplex::<Rational>::from_json(v, 0.0)?;
    let h = cohomology(&c, 0.0);
    let tau = torsion(&c, &h, 0.0)?.value;
    let indep = torsion_choice_independence_check(&c, &h, 10, opts.seed, 0.0)?;
    let mut passed = indep.all_equal;
    if let Some(expected) = expected_rational(e, "torsion")? {
        passed &= tau == expected;
    }
    let betti = betti_numbers(&c, 0.0);
    if let Some(b) = e.expected["betti"].as_array() {
        passed &= b.iter().map(|x| x.as_u64().unwrap_or(u64::MAX) as usize).eq(betti.iter().copied());
    }
    Ok(Check::new(
        &e.name,
        passed,
        json!({"torsion": crate::scalar::format_rational(&tau), "betti": betti, "choice_independence": indep.all_equal}),
    ))
}

fn check_mapping_torus_fixture(e: &FixtureEntry, v: &Value) -> Result<Check, Error> {
    let c = CochainComplex::<Rational>::from_json(&v["complex"], 0.0)?;
    let f = ChainEndomorphism::from_json(c, &v["endomorphism"], 0.0)?;
    let routes = four_routes(&f)?;
    let mut passed = routes.iter().all(|r| *r == routes[0]);
    if let Some(expected) = expected_rational(e, "torsion")? {
        passed &= routes[0] == expected;
    }
    Ok(Check::new(
        &e.name,
        passed,
        json!({"definition": crate::scalar::format_rational(&routes[0]), "routes_agree": routes.iter().all(|r| *r == routes[0])}),
    ))
}

fn four_routes(f: &ChainEndomorphism<Rational>) -> Result<[Rational; 4], Error> {
    let t = build_mapping_torus(f, 0.0)?;
    let ht = cohomology(&t.complex, 0.0);
    Ok([
        torsion_definition(&t, &ht, 0.0)?.value,
        torsion_via_wang(f, 0.0)?.value,
        torsion_closed_form_general(f, &GeneralChoices::default(), &InnerProductPairing::default(), 0.0)?.value,
        torsion_closed_form_finite_order(f, 0.0)?.value,
    ])
}

fn check_surface_fixture(e: &FixtureEntry, v: &Value, opts: &VerifyOptions) -> Result<Check, Error> {
    let rep = SurfaceRepresentation::from_json(v, opts.tol)?;
    let c = twisted_complex(&rep, opts.tol)?;
    let betti = betti_numbers(&c, opts.tol);
    let mut passed = true;
    if let Some(b) = e.expected["betti"].as_array() {
        passed &= b.iter().map(|x| x.as_u64().unwrap_or(u64::MAX) as usize).eq(betti.iter().copied());
    }
    let omega = symplectic_form(&rep, opts.tol)?;
    let prop = omega_property(&omega.matrix, 1e-12)?;
    passed &= prop.passed && omega.antisymmetry_deviation < 1e-8;
    let mut detail = json!({
        "betti": betti,
        "antisymmetry_deviation": omega.antisymmetry_deviation,
        "omega_property": prop.to_json(),
    });
    if !v["automorphism"].is_null() {
        let aut = SurfaceAutomorphismData::from_json(&v["automorphism"], rep.genus)?;
        let r = automorphism_report(&rep, &aut, opts.tol)?;
        let phases: Vec<String> = r.phases[1].iter().map(Phase::to_string).collect();
        if let Some(exp) = e.expected["phases_h1"].as_array() {
            passed &= exp.iter().map(|x| x.as_str().unwrap_or("")).eq(phases.iter().map(String::as_str));
        }
        passed &= r.preserves_omega.is_some_and(|d| d < 1e-8) && r.fixed_omega_rank == r.fixed_dim;
        detail["phases_h1"] = json!(phases);
        detail["pullback_deviation"] = json!(r.preserves_omega);
        detail["fixed_dim"] = json!(r.fixed_dim);
    }
    Ok(Check::new(&e.name, passed, detail))
}

fn check_phase_fixture(e: &FixtureEntry, v: &Value) -> Result<Check, Error> {
    let data = EigenPhaseData::from_json(v)?;
    let r = rho_finite_order(&data);
    let mut passed = r.rho == r.eta_a - r.eta_theta;
    if let Some(expected) = expected_r64(e, "rho")? {
        passed &= r.rho == expected;
    }
    if let Some(expected) = expected_r64(e, "eta_A")? {
        passed &= r.eta_a == expected;
    }
    let framing = framing_identity_check(&data.phases_h10, data.dim_g);
    if e.expected["framing_identity"].as_bool() == Some(true) {
        passed &= framing.deviation < 1e-10;
    }
    let mut detail = r.to_json();
    detail["framing_identity"] = framing.to_json();
    Ok(Check::new(&e.name, passed, detail))
}

fn check_sf_fixture(e: &FixtureEntry, v: &Value) -> Result<Check, Error> {
    let r = |k: &str| -> Result<Rational64, Error> {
        parse_r64(&v[k].as_str().map(str::to_string).unwrap_or_else(|| v[k].to_string()))
    };
    let u = |k: &str| v[k].as_u64().unwrap_or(0) as usize;
    let input = SpectralFlowInput {
        cs_lift: r("cs_lift")?,
        rho: r("rho")?,
        h: u("h"),
        dim_g: u("dim_g"),
        b1: u("b1"),
        dim_h0: u("dim_h0"),
        dim_h1: u("dim_h1"),
    };
    let sf = spectral_flow(&input);
    let mut passed = true;
    if let Some(expected) = expected_r64(e, "spectral_flow")? {
        passed &= sf.value == expected;
    }
    if let Some(integral) = e.expected["integral"].as_bool() {
        passed &= sf.integral == integral;
    }
    Ok(Check::new(&e.name, passed, sf.to_json()))
}

fn forms_check(name: &str, cs: &[ComponentSummary]) -> Check {
    let run = || -> Result<(f64, f64), Error> {
        let rho = leading_term_rho(cs)?;
        let sf = leading_term_sf(cs)?;
        let shifted: Vec<ComponentSummary> = cs.iter().map(|c| c.with_cs_shift(1)).collect();
        let sf_shifted = leading_term_sf(&shifted)?;
        let (mut dev, mut lift_dev) = (0f64, 0f64);
        for k in [10u64, 100, 1000] {
            let scale = rho.value_at(k).norm().max(1.0);
            dev = dev.max((rho.value_at(k) - sf.value_at(k)).norm() / scale);
            lift_dev = lift_dev.max((sf.value_at(k) - sf_shifted.value_at(k)).norm() / scale);
        }
        Ok((dev, lift_dev))
    };
    match run() {
        Ok((dev, lift_dev)) => Check::new(
            name,
            dev < 1e-10 && lift_dev < 1e-10,
            json!({"max_form_deviation": dev, "max_lift_deviation": lift_dev, "components": cs.len()}),
        ),
        Err(err) => Check::failed(name, err),
    }
}

fn check_identification_fixture(e: &FixtureEntry, v: &Value) -> Result<Check, Error> {
    let cs = components_from_json(v)?;
    let k = e.expected["k"].as_u64().unwrap_or(100);
    let target = e.expected["decay_ratio"].as_f64().unwrap_or(2.0);
    let reports = cs
        .iter()
        .map(|c| identification_check(c, k))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| (r.decay_ratio - target).abs() < 0.1);
    Ok(Check::new(
        &e.name,
        passed,
        json!({"reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()}),
    ))
}

fn random_checks(family: &str, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Vec<Check> {
    let wrap = |name: &str, r: Result<Check, Error>| r.unwrap_or_else(|err| Check::failed(name, err));
    match family {
        "torsion" => {
            let name = "random-choice-independence";
            let r = (|| {
                let mut worst = 0usize;
                for i in 0..20 {
                    let degrees = rng.gen_range(1..=3);
                    let c = random_complex::<Rational>(rng, degrees, 5);
                    let h = cohomology(&c, 0.0);
                    if !torsion_choice_independence_check(&c, &h, 5, opts.seed.wrapping_add(i), 0.0)?.all_equal {
                        worst += 1;
                    }
                }
                Ok(Check::new(name, worst == 0, json!({"complexes": 20, "failures": worst})))
            })();
            vec![wrap(name, r)]
        }
        "multiplicativity" => {
            let name = "random-sequences";
            let r = (|| {
                let mut failures = 0;
                for _ in 0..20 {
                    let degrees = rng.gen_range(1..=3);
                    let s = random_ses::<Rational>(rng, degrees, 5);
                    if !multiplicativity_check(&s, None, 0.0)?.ok {
                        failures += 1;
                    }
                }
                Ok(Check::new(name, failures == 0, json!({"sequences": 20, "failures": failures})))
            })();
            vec![wrap(name, r)]
        }
        "wang-triangle" => {
            let name = "random-finite-order-maps";
            let r = (|| {
                let mut failures = 0;
                for _ in 0..20 {
                    let order = rng.gen_range(2..=6);
                    let degrees = rng.gen_range(1..=3);
                    let f = random_finite_order_map::<Rational>(rng, degrees, 4, order);
                    let routes = four_routes(&f)?;
                    if !routes.iter().all(|x| *x == routes[0]) {
                        failures += 1;
                    }
                }
                Ok(Check::new(name, failures == 0, json!({"maps": 20, "failures": failures})))
            })();
            vec![wrap(name, r)]
        }
        "lie" => (2..=4)
            .flat_map(|n| {
                let seed = rng.gen::<u64>();
                let coxeter = dual_coxeter_identity_check(n, 20, seed);
                let chern = chern_relation_check(n, 5, seed);
                let casimir = LieData::su(n).and_then(|l| l.casimir_eigenvalue(1.0, opts.tol));
                [
                    wrap(
                        &format!("su{n}-dual-coxeter"),
                        coxeter.map(|r| Check::new(format!("su{n}-dual-coxeter"), r.passed, r.to_json())).map_err(Error::from),
                    ),
                    wrap(
                        &format!("su{n}-chern-relation"),
                        chern.map(|r| Check::new(format!("su{n}-chern-relation"), r.passed, r.to_json())).map_err(Error::from),
                    ),
                    wrap(
                        &format!("su{n}-casimir"),
                        casimir
                            .map(|r| {
                                Check::new(
                                    format!("su{n}-casimir"),
                                    r.scalar_deviation < 1e-10 && (r.c_ad - 2.0 * n as f64).abs() < 1e-10,
                                    json!({"c_ad": r.c_ad, "scalar_deviation": r.scalar_deviation, "ratio": r.ratio}),
                                )
                            })
                            .map_err(Error::from),
                    ),
                ]
            })
            .collect(),
        "phase-identities" => {
            let mut worst = 0f64;
            for m in 1..=24i64 {
                for j in 1..m {
                    if let Ok(p) = phase_identity_check(Rational64::new(j, m)) {
                        worst = worst.max(p.deviation);
                    }
                }
            }
            let mut worst_integrand = 0f64;
            for _ in 0..50 {
                let order = rng.gen_range(2..=12);
                let len = rng.gen_range(1..=6);
                let phases: Vec<Phase> = (0..len).map(|_| Phase::new(rng.gen_range(1..order), order)).collect();
                worst_integrand = worst_integrand.max(integrand_identity_check(&phases).deviation);
            }
            vec![
                Check::new("simple-fact-m-le-24", worst < 1e-12, json!({"max_deviation": worst})),
                Check::new(
                    "integrand-identity",
                    worst_integrand < 1e-10,
                    json!({"multisets": 50, "max_deviation": worst_integrand}),
                ),
            ]
        }
        "rho" => {
            let mut ok = true;
            for _ in 0..20 {
                let order = rng.gen_range(2..=8);
                let a: Vec<Phase> = (0..rng.gen_range(0..5)).map(|_| Phase::new(rng.gen_range(0..order), order)).collect();
                let b: Vec<Phase> = (0..rng.gen_range(0..5)).map(|_| Phase::new(rng.gen_range(0..order), order)).collect();
                let e1 = EigenPhaseData::new(a.clone(), b.clone(), 3);
                let e2 = EigenPhaseData::new(b, a, 3);
                let (r1, r2) = (rho_finite_order(&e1), rho_finite_order(&e2));
                let mut shuffled = e1.clone();
                shuffled.phases_moduli.reverse();
                ok &= rho_finite_order(&e1.union(&e2)).rho == r1.rho + r2.rho
                    && rho_finite_order(&shuffled).rho == r1.rho
                    && r1.rho == r1.eta_a - r1.eta_theta;
            }
            vec![Check::new("random-additivity-and-symmetry", ok, json!({"pairs": 20}))]
        }
        "forms" => {
            let cs: Vec<ComponentSummary> = (0..20)
                .map(|_| {
                    let n = rng.gen_range(2..=3);
                    let order = rng.gen_range(2..=8);
                    random_component(rng, n, order)
                })
                .collect();
            vec![forms_check("random-components", &cs)]
        }
        _ => Vec::new(),
    }
}

/// `Rational64` from `"p/q"` (used by the CLI).
pub fn parse_r64(s: &str) -> Result<Rational64, Error> {
    let q = parse_rational(s).map_err(Error::Input)?;
    use num_traits::ToPrimitive;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(Error::Input(format!("{s} does not fit in 64-bit rationals"))),
    }
}
