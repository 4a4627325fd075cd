use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use torsion_core::asymptotics::{components_from_json, identification_check, leading_term_rho, leading_term_sf};
use torsion_core::cochain::{
    betti_numbers, cohomology, torsion, torsion_choice_independence_check, CochainComplex, CohomologyData,
};
use torsion_core::lie_algebra::lie_check_json;
use torsion_core::linalg::json_matrix_is_rational;
use torsion_core::mapping_torus::{
    build_mapping_torus, torsion_closed_form_finite_order, torsion_closed_form_general, torsion_definition,
    torsion_via_wang, ChainEndomorphism, GeneralChoices, InnerProductPairing,
};
use torsion_core::spectral_invariants::{
    central_charge, framing_correction, framing_identity_check, rho_finite_order, spectral_flow, EigenPhaseData,
    SpectralFlowInput,
};
use torsion_core::surface_rep::{
    automorphism_report, omega_property, symplectic_form, twisted_complex, SurfaceAutomorphismData,
    SurfaceRepresentation,
};
use torsion_core::verify::{parse_r64, run_verify_suite, VerifyOptions};
use torsion_core::{Error, Rational, Scalar, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "torsion", version, about = "Torsion, spectral invariants and leading asymptotics of mapping tori")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance for floating-point rank decisions.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Torsion(TorsionCmd),
    #[command(subcommand)]
    Surface(SurfaceCmd),
    #[command(subcommand)]
    Lie(LieCmd),
    #[command(subcommand)]
    Invariants(InvariantsCmd),
    #[command(subcommand)]
    Asymptotics(AsymptoticsCmd),
    /// Run the verification suite on the shipped fixtures.
    Verify {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TorsionCmd {
    /// Torsion of a cochain complex.
    Compute {
        #[arg(long)]
        complex: PathBuf,
        /// Cohomology lifts; defaults to the pivot-rule basis.
        #[arg(long)]
        cohomology: Option<PathBuf>,
        /// Also re-run with this many random sections and lifts.
        #[arg(long, default_value_t = 0)]
        check_choices: usize,
    },
    /// Torsion of the algebraic mapping torus by every available route.
    MappingTorus {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Cohomology {
        #[arg(long)]
        rep: PathBuf,
    },
    Omega {
        #[arg(long)]
        rep: PathBuf,
    },
}

#[derive(Subcommand)]
enum LieCmd {
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum InvariantsCmd {
    Rho {
        #[arg(long)]
        phases: PathBuf,
    },
    Sf {
        #[arg(long, allow_hyphen_values = true)]
        cs: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        dim_g: usize,
        #[arg(long)]
        b1: usize,
        #[arg(long)]
        h0: usize,
        #[arg(long)]
        h1: usize,
    },
    Framing {
        #[arg(long)]
        phases: PathBuf,
        /// Exponent alpha; defaults to `-zeta/2` at level `k`, or `-dim G/2` without `k`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Rho,
    Sf,
    Both,
}

#[derive(Subcommand)]
enum AsymptoticsCmd {
    Leading {
        #[arg(long)]
        components: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: u64,
        #[arg(long, value_enum, default_value_t = Form::Both)]
        form: Form,
    },
    Identify {
        #[arg(long)]
        components: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: u64,
    },
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn complex_torsion<F: Scalar>(cli: &Cli, v: &Value, coh: Option<&Value>, trials: usize) -> Result<Value, Error> {
    let tol = if F::EXACT { 0.0 } else { cli.tol };
    let c = CochainComplex::<F>::from_json(v, tol)?;
    let h = match coh {
        Some(x) => CohomologyData::from_json(x)?,
        None => cohomology(&c, tol),
    };
    let t = torsion(&c, &h, tol)?;
    let mut out = json!({
        "version": 1,
        "scalar": if F::EXACT { "rational" } else { "complex" },
        "betti": betti_numbers(&c, tol),
        "torsion": t.to_json(),
    });
    if trials > 0 {
        out["choice_independence"] = torsion_choice_independence_check(&c, &h, trials, cli.seed, tol)?.to_json();
    }
    Ok(out)
}

fn mapping_torus_routes<F: Scalar>(cli: &Cli, v: &Value) -> Result<Value, Error> {
    let tol = if F::EXACT { 0.0 } else { cli.tol };
    let c = CochainComplex::<F>::from_json(&v["complex"], tol)?;
    let f = ChainEndomorphism::from_json(c, &v["endomorphism"], tol)?;
    let t = build_mapping_torus(&f, tol)?;
    let ht = cohomology(&t.complex, tol);
    let mut routes = serde_json::Map::new();
    routes.insert("definition".into(), torsion_definition(&t, &ht, tol)?.to_json());
    routes.insert("wang".into(), torsion_via_wang(&f, tol)?.to_json());
    routes.insert(
        "general".into(),
        torsion_closed_form_general(&f, &GeneralChoices::default(), &InnerProductPairing::default(), tol)?.to_json(),
    );
    if f.order > 0 {
        routes.insert("finite_order".into(), torsion_closed_form_finite_order(&f, tol)?.to_json());
    }
    Ok(json!({
        "version": 1,
        "betti_base": betti_numbers(&f.base, tol),
        "betti_torus": betti_numbers(&t.complex, tol),
        "routes": routes,
    }))
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn run(cli: &Cli) -> Result<(Value, bool), Error> {
    let tol = cli.tol;
    let out = match &cli.command {
        Command::Torsion(TorsionCmd::Compute {
            complex,
            cohomology,
            check_choices,
        }) => {
            let v = read_json(complex)?;
            let h = cohomology.as_deref().map(read_json).transpose()?;
            let rational = v["differentials"]
                .as_array()
                .is_some_and(|ds| ds.iter().all(json_matrix_is_rational));
            if rational {
                complex_torsion::<Rational>(cli, &v, h.as_ref(), *check_choices)?
            } else {
                complex_torsion::<Complex64>(cli, &v, h.as_ref(), *check_choices)?
            }
        }
        Command::Torsion(TorsionCmd::MappingTorus { input }) => {
            let v = read_json(input)?;
            let rational = v["complex"]["differentials"]
                .as_array()
                .is_some_and(|ds| ds.iter().all(json_matrix_is_rational))
                && v["endomorphism"]["maps"]
                    .as_array()
                    .is_some_and(|ms| ms.iter().all(json_matrix_is_rational));
            if rational {
                mapping_torus_routes::<Rational>(cli, &v)?
            } else {
                mapping_torus_routes::<Complex64>(cli, &v)?
            }
        }
        Command::Surface(SurfaceCmd::Cohomology { rep }) => {
            let v = read_json(rep)?;
            let r = SurfaceRepresentation::from_json(&v, tol)?;
            let c = twisted_complex(&r, tol)?;
            let mut out = json!({"version": 1, "genus": r.genus, "group": r.lie.name, "betti": betti_numbers(&c, tol)});
            if !v["automorphism"].is_null() {
                let aut = SurfaceAutomorphismData::from_json(&v["automorphism"], r.genus)?;
                let rep = automorphism_report(&r, &aut, tol)?;
                out["phases"] = json!(rep
                    .phases
                    .iter()
                    .map(|ps| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>());
                out["pullback_deviation"] = json!(rep.preserves_omega);
                out["fixed_dim"] = json!(rep.fixed_dim);
                out["fixed_omega_rank"] = json!(rep.fixed_omega_rank);
            }
            out
        }
        Command::Surface(SurfaceCmd::Omega { rep }) => {
            let r = SurfaceRepresentation::from_json(&read_json(rep)?, tol)?;
            let o = symplectic_form(&r, tol)?;
            let mut out = o.to_json();
            out["omega_property"] = omega_property(&o.matrix, 1e-12)?.to_json();
            out
        }
        Command::Lie(LieCmd::Check { n, trials }) => lie_check_json(*n, *trials, cli.seed, tol)?,
        Command::Invariants(InvariantsCmd::Rho { phases }) => {
            let e = EigenPhaseData::from_json(&read_json(phases)?)?;
            rho_finite_order(&e).to_json()
        }
        Command::Invariants(InvariantsCmd::Sf {
            cs,
            rho,
            h,
            dim_g,
            b1,
            h0,
            h1,
        }) => spectral_flow(&SpectralFlowInput {
            cs_lift: parse_r64(cs)?,
            rho: parse_r64(rho)?,
            h: *h,
            dim_g: *dim_g,
            b1: *b1,
            dim_h0: *h0,
            dim_h1: *h1,
        })
        .to_json(),
        Command::Invariants(InvariantsCmd::Framing { phases, alpha, k }) => {
            let e = EigenPhaseData::from_json(&read_json(phases)?)?;
            let h = ((e.dim_g + 1) as f64).sqrt().round() as usize;
            let alpha = match (alpha, k) {
                (Some(a), _) => *a,
                (None, Some(k)) => -central_charge(*k as f64, e.dim_g, h) / 2.0,
                (None, None) => -(e.dim_g as f64) / 2.0,
            };
            json!({
                "version": 1,
                "alpha": alpha,
                "det_f_alpha": complex_json(framing_correction(&e.phases_h10, alpha)),
                "leading_identity": framing_identity_check(&e.phases_h10, e.dim_g).to_json(),
            })
        }
        Command::Asymptotics(AsymptoticsCmd::Leading { components, k, form }) => {
            let cs = components_from_json(&read_json(components)?)?;
            match form {
                Form::Rho => json!({"rho": leading_term_rho(&cs)?.to_json(Some(*k))}),
                Form::Sf => json!({"sf": leading_term_sf(&cs)?.to_json(Some(*k))}),
                Form::Both => json!({
                    "rho": leading_term_rho(&cs)?.to_json(Some(*k)),
                    "sf": leading_term_sf(&cs)?.to_json(Some(*k)),
                }),
            }
        }
        Command::Asymptotics(AsymptoticsCmd::Identify { components, k }) => {
            let cs = components_from_json(&read_json(components)?)?;
            let reports = cs
                .iter()
                .map(|c| identification_check(c, *k).map(|r| r.to_json()))
                .collect::<Result<Vec<_>, _>>()?;
            json!({"version": 1, "reports": reports})
        }
        Command::Verify { filter, fixtures } => {
            let mut opts = VerifyOptions {
                filter: filter.clone(),
                seed: cli.seed,
                tol,
                ..VerifyOptions::default()
            };
            if let Some(dir) = fixtures {
                opts.fixtures_dir = dir.clone();
            }
            let report = run_verify_suite(&opts)?;
            for (family, c) in report.checks() {
                eprintln!("{} {family}/{}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            }
            return Ok((report.to_json(), report.passed()));
        }
    };
    Ok((out, true))
}

fn emit(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((v, ok)) => {
            emit(&v);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            emit(&e.to_json());
            ExitCode::from(1)
        }
    }
}
