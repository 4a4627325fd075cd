//! Leading-order large-level terms for finite-order mapping tori,
//! assembled from per-component summaries.
//!
//! Each flat-connection component `c` contributes `e^{2 pi i k q_c} k^{d_c} b_c`.
//! The amplitude is a finite sum over user-supplied samples
//! `(weight, phases of df)`. In the rho form it is
//! `b_c = (1/|Z(G)|) sum sqrt(tau) e^{2 pi i rho / 8}`, and in the spectral-flow
//! form it is
//! `e^{i pi dim G (1 + b1)/4} e^{2 pi i h CS} sum sqrt(tau) e^{2 pi i (SF/4 - (h0 + h1)/8)} / |Z(G)|`.
//! Samples are points of the `|Z(G)|`-fold cover of the fixed-point set.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::phase::{format_r64, Phase};
use crate::spectral_invariants::{
    central_charge, framing_exponent, framing_identity_check, rho_finite_order, spectral_flow, EigenPhaseData,
    SpectralError, SpectralFlowInput,
};

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("component {0:?} has no samples")]
    EmptyComponent(String),
    #[error("component {0:?} lacks b1/dim_h0/dim_h1 needed for the spectral-flow form")]
    MissingSFFields(String),
    #[error("component {0:?} contains only reducible connections, which are not supported")]
    ReducibleComponent(String),
    #[error("component {name:?}: {reason}")]
    Invalid { name: String, reason: String },
    #[error("rho and spectral-flow forms disagree on component {name:?} by {deviation:e}")]
    FormMismatch { name: String, deviation: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Symplectic volume `omega^{d_c} / d_c!` carried by the sample.
    pub weight: f64,
    /// Phases of `df` on the tangent space of the moduli space of the surface.
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SfFields {
    pub b1: usize,
    pub dim_h0: usize,
    pub dim_h1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub name: String,
    pub group_n: usize,
    /// Chosen real lift of the Chern-Simons value.
    pub cs_value: Rational64,
    pub d_c: Rational64,
    pub center_order: usize,
    pub phases_h10: Vec<Phase>,
    pub samples: Vec<Sample>,
    pub sf: Option<SfFields>,
    pub irreducible: bool,
}

impl ComponentSummary {
    pub fn dim_g(&self) -> usize {
        self.group_n * self.group_n - 1
    }

    pub fn dual_coxeter(&self) -> usize {
        self.group_n
    }

    pub fn validate(&self) -> Result<(), AsymptoticsError> {
        let bad = |reason: String| AsymptoticsError::Invalid {
            name: self.name.clone(),
            reason,
        };
        if !self.irreducible {
            return Err(AsymptoticsError::ReducibleComponent(self.name.clone()));
        }
        if self.samples.is_empty() {
            return Err(AsymptoticsError::EmptyComponent(self.name.clone()));
        }
        if self.group_n < 2 {
            return Err(bad(format!("unsupported group su{}", self.group_n)));
        }
        if self.center_order == 0 {
            return Err(bad("center order must be positive".into()));
        }
        if self.d_c < Rational64::zero() || !(self.d_c * 2).is_integer() {
            return Err(bad(format!("d_c = {} is not a nonnegative half-integer", format_r64(&self.d_c))));
        }
        if let Some(w) = self.samples.iter().map(|s| s.weight).find(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(bad(format!("weight {w} is not positive")));
        }
        if let Some(sf) = self.sf {
            let expected = Rational64::new(sf.dim_h1 as i64 - sf.dim_h0 as i64, 2);
            if expected != self.d_c {
                return Err(bad(format!(
                    "d_c = {} but (dim H1 - dim H0)/2 = {}",
                    format_r64(&self.d_c),
                    format_r64(&expected)
                )));
            }
        }
        Ok(())
    }

    pub fn with_cs_shift(&self, shift: i64) -> Self {
        Self {
            cs_value: self.cs_value + shift,
            ..self.clone()
        }
    }

    pub fn phase_data(&self, s: &Sample) -> EigenPhaseData {
        EigenPhaseData::new(s.phases.clone(), self.phases_h10.clone(), self.dim_g())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "group": format!("su{}", self.group_n),
            "cs_value": format_r64(&self.cs_value),
            "d_c": format_r64(&self.d_c),
            "center_order": self.center_order,
            "phases_h10": self.phases_h10.iter().map(Phase::to_json).collect::<Vec<_>>(),
            "samples": self.samples.iter().map(|s| json!({
                "weight": s.weight,
                "phases": s.phases.iter().map(Phase::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "irreducible": self.irreducible,
        });
        if let Some(sf) = self.sf {
            v["b1"] = json!(sf.b1);
            v["dim_h0"] = json!(sf.dim_h0);
            v["dim_h1"] = json!(sf.dim_h1);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, AsymptoticsError> {
        let name = v["name"].as_str().unwrap_or("").to_string();
        let bad = |reason: &str| AsymptoticsError::Invalid {
            name: name.clone(),
            reason: reason.to_string(),
        };
        let group = v["group"].as_str().unwrap_or("su2");
        let group_n: usize = group
            .strip_prefix("su")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("group must be suN"))?;
        let rational = |key: &str| -> Result<Rational64, AsymptoticsError> {
            let s = match &v[key] {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Null => "0".into(),
                _ => return Err(bad(&format!("{key} must be \"p/q\""))),
            };
            let (n, d) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            match (n.trim().parse::<i64>(), d.trim().parse::<i64>()) {
                (Ok(n), Ok(d)) if d != 0 => Ok(Rational64::new(n, d)),
                _ => Err(bad(&format!("{key} must be \"p/q\""))),
            }
        };
        let phases = |x: &Value| -> Result<Vec<Phase>, AsymptoticsError> {
            match x {
                Value::Null => Ok(Vec::new()),
                Value::Array(a) => a
                    .iter()
                    .map(|p| Phase::from_json(p).map_err(|e| bad(&e)))
                    .collect(),
                _ => Err(bad("phases must be an array")),
            }
        };
        let samples = v["samples"]
            .as_array()
            .ok_or_else(|| bad("missing samples"))?
            .iter()
            .map(|s| {
                Ok(Sample {
                    weight: s["weight"].as_f64().ok_or_else(|| bad("sample weight missing"))?,
                    phases: phases(&s["phases"])?,
                })
            })
            .collect::<Result<Vec<_>, AsymptoticsError>>()?;
        let sf = match (v["b1"].as_u64(), v["dim_h0"].as_u64(), v["dim_h1"].as_u64()) {
            (Some(b1), Some(h0), Some(h1)) => Some(SfFields {
                b1: b1 as usize,
                dim_h0: h0 as usize,
                dim_h1: h1 as usize,
            }),
            _ => None,
        };
        let c = Self {
            name: name.clone(),
            group_n,
            cs_value: rational("cs_value")?,
            d_c: rational("d_c")?,
            center_order: v["center_order"].as_u64().unwrap_or(group_n as u64) as usize,
            phases_h10: phases(&v["phases_h10"])?,
            samples,
            sf,
            irreducible: v["irreducible"].as_bool().unwrap_or(true),
        };
        c.validate()?;
        Ok(c)
    }
}

pub fn components_from_json(v: &Value) -> Result<Vec<ComponentSummary>, AsymptoticsError> {
    let list = v["components"].as_array().ok_or_else(|| AsymptoticsError::Invalid {
        name: String::new(),
        reason: "missing components array".into(),
    })?;
    list.iter().map(ComponentSummary::from_json).collect()
}

pub fn components_to_json(cs: &[ComponentSummary]) -> Value {
    json!({"version": 1, "components": cs.iter().map(ComponentSummary::to_json).collect::<Vec<_>>()})
}

fn cis(turns: f64) -> C {
    C::from_polar(1.0, 2.0 * PI * turns)
}

fn r2f(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `prod (1 - xi_j)` over the nonzero phases.
pub fn det_one_minus(phases: &[Phase]) -> C {
    let one = C::new(1.0, 0.0);
    phases
        .iter()
        .filter(|p| !p.is_zero())
        .fold(one, |acc, p| acc * (one - p.root_of_unity()))
}

/// `sqrt(tau) = weight / |det(1 - df)|` on the conormal directions.
pub fn sqrt_torsion(s: &Sample) -> f64 {
    s.weight / det_one_minus(&s.phases).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub amplitude: C,
    pub exponent: Rational64,
    pub cs_phase: Rational64,
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LeadingOrderTerm {
    pub terms: Vec<Term>,
}

impl LeadingOrderTerm {
    /// `sum e^{2 pi i k q_j} k^{d_j} b_j`; at `k = 0` this is `sum b_j`.
    pub fn value_at(&self, k: u64) -> C {
        self.terms
            .iter()
            .map(|t| {
                if k == 0 {
                    return t.amplitude;
                }
                let q = (t.cs_phase * k as i64).fract();
                t.amplitude * cis(r2f(q)) * (k as f64).powf(r2f(t.exponent))
            })
            .sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn to_json(&self, k: Option<u64>) -> Value {
        let mut v = json!({
            "version": 1,
            "terms": self.terms.iter().map(|t| json!({
                "component": t.component,
                "amplitude": [t.amplitude.re, t.amplitude.im],
                "exponent": format_r64(&t.exponent),
                "cs_phase": format_r64(&t.cs_phase),
            })).collect::<Vec<_>>(),
        });
        if let Some(k) = k {
            let z = self.value_at(k);
            v["k"] = json!(k);
            v["value_at_k"] = json!([z.re, z.im]);
        }
        v
    }
}

fn rho_amplitude(c: &ComponentSummary) -> C {
    let sum: C = c
        .samples
        .iter()
        .map(|s| {
            let rho = rho_finite_order(&c.phase_data(s)).rho;
            cis(r2f(rho) / 8.0) * sqrt_torsion(s)
        })
        .sum();
    sum / c.center_order as f64
}

fn sf_amplitude(c: &ComponentSummary) -> Result<C, AsymptoticsError> {
    let sf_fields = c.sf.ok_or_else(|| AsymptoticsError::MissingSFFields(c.name.clone()))?;
    let (g, h) = (c.dim_g(), c.dual_coxeter());
    let prefactor = cis((g * (1 + sf_fields.b1)) as f64 / 8.0);
    let cs_part = cis(r2f((c.cs_value * h as i64).fract()));
    let n = (sf_fields.dim_h0 + sf_fields.dim_h1) as f64;
    let sum: C = c
        .samples
        .iter()
        .map(|s| {
            let rho = rho_finite_order(&c.phase_data(s)).rho;
            let sf = spectral_flow(&SpectralFlowInput {
                cs_lift: c.cs_value,
                rho,
                h,
                dim_g: g,
                b1: sf_fields.b1,
                dim_h0: sf_fields.dim_h0,
                dim_h1: sf_fields.dim_h1,
            });
            cis(r2f((sf.value / 4).fract()) - n / 8.0)
                * sqrt_torsion(s)
        })
        .sum();
    Ok(prefactor * cs_part * sum / c.center_order as f64)
}

pub fn leading_term_rho(components: &[ComponentSummary]) -> Result<LeadingOrderTerm, AsymptoticsError> {
    let terms = components
        .iter()
        .map(|c| {
            c.validate()?;
            Ok(Term {
                amplitude: rho_amplitude(c),
                exponent: c.d_c,
                cs_phase: c.cs_value,
                component: c.name.clone(),
            })
        })
        .collect::<Result<Vec<_>, AsymptoticsError>>()?;
    Ok(LeadingOrderTerm { terms })
}

/// Spectral-flow form; every amplitude is checked against the rho form.
pub fn leading_term_sf(components: &[ComponentSummary]) -> Result<LeadingOrderTerm, AsymptoticsError> {
    let terms = components
        .iter()
        .map(|c| {
            c.validate()?;
            let amplitude = sf_amplitude(c)?;
            let reference = rho_amplitude(c);
            let deviation = (amplitude - reference).norm() / reference.norm().max(1.0);
            if deviation > 1e-10 {
                return Err(AsymptoticsError::FormMismatch {
                    name: c.name.clone(),
                    deviation,
                });
            }
            Ok(Term {
                amplitude,
                exponent: c.d_c,
                cs_phase: c.cs_value,
                component: c.name.clone(),
            })
        })
        .collect::<Result<Vec<_>, AsymptoticsError>>()?;
    Ok(LeadingOrderTerm { terms })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationReport {
    pub k: u64,
    pub lhs: C,
    pub rhs: C,
    pub gap: f64,
    pub gap_2k: f64,
    /// `gap(k) / gap(2k)`; close to 2 for an `O(1/k)` remainder.
    pub decay_ratio: f64,
    /// Gap with the central charge replaced by its leading order `dim G`.
    pub leading_gap: f64,
    pub framing_obstruction: Rational64,
}

impl IdentificationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "k": self.k,
            "lhs": [self.lhs.re, self.lhs.im],
            "rhs": [self.rhs.re, self.rhs.im],
            "gap": self.gap,
            "gap_2k": self.gap_2k,
            "decay_ratio": self.decay_ratio,
            "leading_gap": self.leading_gap,
            "framing_obstruction": format_r64(&self.framing_obstruction),
        })
    }
}

/// `exp(i pi zeta sum w) e^{2 pi i k CS} (1/|Z|) sum weight / det(1 - df)`.
fn identification_lhs(c: &ComponentSummary, zeta: f64, k: u64) -> C {
    let s = r2f(framing_exponent(&c.phases_h10));
    let sum: C = c.samples.iter().map(|x| x.weight / det_one_minus(&x.phases)).sum();
    C::from_polar(1.0, PI * zeta * s) * cis(r2f((c.cs_value * k as i64).fract())) * sum / c.center_order as f64
}

fn identification_rhs(c: &ComponentSummary, k: u64) -> C {
    cis(r2f((c.cs_value * k as i64).fract())) * rho_amplitude(c)
}

pub fn identification_check(c: &ComponentSummary, k: u64) -> Result<IdentificationReport, AsymptoticsError> {
    c.validate()?;
    let (g, h) = (c.dim_g(), c.dual_coxeter());
    let gap_at = |k: u64| {
        let lhs = identification_lhs(c, central_charge(k as f64, g, h), k);
        let rhs = identification_rhs(c, k);
        (lhs, rhs, (lhs - rhs).norm())
    };
    let (lhs, rhs, gap) = gap_at(k);
    let (_, _, gap_2k) = gap_at(2 * k);
    let leading_gap = (identification_lhs(c, g as f64, k) - rhs).norm();
    Ok(IdentificationReport {
        k,
        lhs,
        rhs,
        gap,
        gap_2k,
        decay_ratio: gap / gap_2k,
        leading_gap,
        framing_obstruction: framing_identity_check(&c.phases_h10, g).obstruction,
    })
}

/// Random consistent summary: phases are multiples of `1/order`, `2 d_c` of the
/// moduli phases vanish, `H^0 = 0` and `dim H^1 = 2 d_c`.
pub fn random_component(rng: &mut ChaCha8Rng, group_n: usize, order: i64) -> ComponentSummary {
    let twice_d = rng.gen_range(0..=4usize);
    let conormal = rng.gen_range(1..=4usize);
    let h10_len = rng.gen_range(0..=3usize);
    let h10: Vec<Phase> = (0..h10_len).map(|_| Phase::new(rng.gen_range(0..order), order)).collect();
    let nsamples = rng.gen_range(1..=4usize);
    let samples = (0..nsamples)
        .map(|_| {
            let mut phases = vec![Phase::zero(); twice_d];
            phases.extend((0..conormal).map(|_| Phase::new(rng.gen_range(1..order), order)));
            Sample {
                weight: rng.gen_range(0.1..3.0),
                phases,
            }
        })
        .collect();
    ComponentSummary {
        name: format!("random-{}", rng.gen::<u32>()),
        group_n,
        cs_value: Rational64::new(rng.gen_range(-2 * order..=2 * order), order),
        d_c: Rational64::new(twice_d as i64, 2),
        center_order: group_n,
        phases_h10: h10,
        samples,
        sf: Some(SfFields {
            b1: rng.gen_range(0..=3),
            dim_h0: 0,
            dim_h1: twice_d,
        }),
        irreducible: true,
    }
}
