//! Eta and rho invariants of finite-order mapping tori from eigenphase data,
//! the framing correction `det(f)^alpha`, the spectral flow from the
//! Chern-Simons/rho relation, and the phase identities relating
//! `det(1 - df)^{-1}` to `sqrt(tau) e^{i pi eta / 4}`.
//!
//! All real-valued invariants are exact rationals.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::phase::{format_r64, sum_phases, Phase};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("phase {0} outside [0, 1)")]
    PhaseOutOfRange(String),
    #[error("xi = exp(2 pi i theta) is 1 (theta = {0})")]
    XiIsOne(String),
    #[error("rank {field} = {given} but {expected} phases are nonzero")]
    RankMismatch { field: &'static str, given: usize, expected: usize },
    #[error("bad phase data: {0}")]
    Json(String),
}

/// Strict conversion: rejects values outside `[0, 1)` instead of reducing them.
pub fn strict_phase(r: Rational64) -> Result<Phase, SpectralError> {
    if r < Rational64::zero() || r >= Rational64::from_integer(1) {
        return Err(SpectralError::PhaseOutOfRange(format_r64(&r)));
    }
    Ok(Phase::from_rational(r))
}

fn parse_strict(v: &Value) -> Result<Phase, SpectralError> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(SpectralError::Json(format!("phase must be \"p/q\", got {other}"))),
    };
    let (n, d) = s.split_once('/').unwrap_or((s.as_str(), "1"));
    let n: i64 = n.trim().parse().map_err(|_| SpectralError::Json(format!("bad phase {s:?}")))?;
    let d: i64 = d.trim().parse().map_err(|_| SpectralError::Json(format!("bad phase {s:?}")))?;
    if d == 0 {
        return Err(SpectralError::Json(format!("zero denominator in {s:?}")));
    }
    strict_phase(Rational64::new(n, d))
}

/// `tr log T = sum theta_j` with `theta_j` in `[0, 1)`.
pub fn tr_log(phases: &[Rational64]) -> Result<Rational64, SpectralError> {
    let checked = phases.iter().map(|&r| strict_phase(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(sum_phases(&checked))
}

fn nonzero(phases: &[Phase]) -> usize {
    phases.iter().filter(|p| !p.is_zero()).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPhaseData {
    /// Phases of `df` on the tangent space of the moduli space at the fixed point.
    pub phases_moduli: Vec<Phase>,
    /// Phases of `f^*` on `H^{1,0}` of the surface.
    pub phases_h10: Vec<Phase>,
    pub dim_g: usize,
    pub rank_n: usize,
    pub rank_h10: usize,
}

impl EigenPhaseData {
    /// Ranks derived from the phase counts.
    pub fn new(phases_moduli: Vec<Phase>, phases_h10: Vec<Phase>, dim_g: usize) -> Self {
        let rank_n = nonzero(&phases_moduli);
        let rank_h10 = nonzero(&phases_h10);
        Self {
            phases_moduli,
            phases_h10,
            dim_g,
            rank_n,
            rank_h10,
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        let n = nonzero(&self.phases_moduli);
        if n != self.rank_n {
            return Err(SpectralError::RankMismatch { field: "rank_n", given: self.rank_n, expected: n });
        }
        let h = nonzero(&self.phases_h10);
        if h != self.rank_h10 {
            return Err(SpectralError::RankMismatch { field: "rank_h10", given: self.rank_h10, expected: h });
        }
        Ok(())
    }

    /// Disjoint union of two phase data sets with the same group.
    pub fn union(&self, other: &Self) -> Self {
        let mut m = self.phases_moduli.clone();
        m.extend(&other.phases_moduli);
        let mut h = self.phases_h10.clone();
        h.extend(&other.phases_h10);
        Self::new(m, h, self.dim_g)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "dim_g": self.dim_g,
            "phases_moduli": self.phases_moduli.iter().map(Phase::to_json).collect::<Vec<_>>(),
            "phases_h10": self.phases_h10.iter().map(Phase::to_json).collect::<Vec<_>>(),
            "rank_n": self.rank_n,
            "rank_h10": self.rank_h10,
        })
    }

    /// Missing ranks are derived; given ranks are validated.
    pub fn from_json(v: &Value) -> Result<Self, SpectralError> {
        let list = |key: &str| -> Result<Vec<Phase>, SpectralError> {
            match &v[key] {
                Value::Null => Ok(Vec::new()),
                Value::Array(a) => a.iter().map(parse_strict).collect(),
                _ => Err(SpectralError::Json(format!("{key} must be an array"))),
            }
        };
        let dim_g = v["dim_g"].as_u64().ok_or_else(|| SpectralError::Json("missing dim_g".into()))? as usize;
        let mut e = Self::new(list("phases_moduli")?, list("phases_h10")?, dim_g);
        if let Some(r) = v["rank_n"].as_u64() {
            e.rank_n = r as usize;
        }
        if let Some(r) = v["rank_h10"].as_u64() {
            e.rank_h10 = r as usize;
        }
        e.validate()?;
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eta_a: Rational64,
    pub eta_theta: Rational64,
    pub rho: Rational64,
    /// `det(f)^{-dim G / 2}` on `H^{1,0}`.
    pub framing_correction: Complex64,
}

impl SpectralReport {
    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "eta_A": format_r64(&self.eta_a),
            "eta_theta": format_r64(&self.eta_theta),
            "rho": format_r64(&self.rho),
            "rho_f64": self.rho.to_f64(),
            "framing_correction": [self.framing_correction.re, self.framing_correction.im],
        })
    }
}

pub fn eta_a(e: &EigenPhaseData) -> Rational64 {
    Rational64::from_integer(-4) * sum_phases(&e.phases_moduli) + Rational64::from_integer(2 * e.rank_n as i64)
}

pub fn eta_theta(e: &EigenPhaseData) -> Rational64 {
    let g = e.dim_g as i64;
    Rational64::from_integer(-4 * g) * sum_phases(&e.phases_h10) + Rational64::from_integer(2 * g * e.rank_h10 as i64)
}

pub fn rho_finite_order(e: &EigenPhaseData) -> SpectralReport {
    let (a, t) = (eta_a(e), eta_theta(e));
    let rho = a - t;
    SpectralReport {
        eta_a: a,
        eta_theta: t,
        rho,
        framing_correction: framing_correction(&e.phases_h10, -(e.dim_g as f64) / 2.0),
    }
}

/// `det(f)^alpha = exp(sum_{0 != w in (-1/2, 1/2)} -2 pi i alpha w)` over shifted phases `w`.
pub fn framing_correction(phases_h10: &[Phase], alpha: f64) -> Complex64 {
    let s = framing_exponent(phases_h10).to_f64().unwrap_or(f64::NAN);
    Complex64::from_polar(1.0, -2.0 * PI * alpha * s)
}

/// Sum of the shifted phases entering `det(f)^alpha`.
pub fn framing_exponent(phases_h10: &[Phase]) -> Rational64 {
    phases_h10
        .iter()
        .map(Phase::shifted)
        .filter(|w| *w != Rational64::new(-1, 2))
        .fold(Rational64::zero(), |a, w| a + w)
}

/// `zeta = k dim G / (k + h)`.
pub fn central_charge(k: f64, dim_g: usize, h: usize) -> f64 {
    k * dim_g as f64 / (k + h as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIdentity {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub deviation: f64,
}

impl PhaseIdentity {
    pub fn to_json(&self) -> Value {
        json!({
            "lhs": [self.lhs.re, self.lhs.im],
            "rhs": [self.rhs.re, self.rhs.im],
            "deviation": self.deviation,
        })
    }
}

/// `1/(1 - xi) = e^{-2 pi i theta / 2} i / |1 - xi|` for `xi = e^{2 pi i theta} != 1`.
pub fn phase_identity_check(theta: Rational64) -> Result<PhaseIdentity, SpectralError> {
    let p = strict_phase(theta).map_err(|_| SpectralError::PhaseOutOfRange(format_r64(&theta)))?;
    if p.is_zero() {
        return Err(SpectralError::XiIsOne(format_r64(&theta)));
    }
    let one = Complex64::new(1.0, 0.0);
    let xi = p.root_of_unity();
    let lhs = one / (one - xi);
    let rhs = Complex64::from_polar(1.0, -PI * p.to_f64()) * Complex64::i() / (one - xi).norm();
    Ok(PhaseIdentity {
        lhs,
        rhs,
        deviation: (lhs - rhs).norm(),
    })
}

/// `prod (1 - xi_j)^{-1}` against `e^{i pi eta_A / 4} prod |1 - xi_j|^{-1}` over the nonzero phases.
pub fn integrand_identity_check(phases: &[Phase]) -> PhaseIdentity {
    let one = Complex64::new(1.0, 0.0);
    let nz: Vec<Phase> = phases.iter().copied().filter(|p| !p.is_zero()).collect();
    let lhs = nz.iter().fold(one, |acc, p| acc / (one - p.root_of_unity()));
    let abs = nz.iter().fold(1.0, |acc, p| acc / (one - p.root_of_unity()).norm());
    let e = EigenPhaseData::new(nz, Vec::new(), 0);
    let eta = eta_a(&e).to_f64().unwrap_or(f64::NAN);
    let rhs = Complex64::from_polar(abs, PI * eta / 4.0);
    PhaseIdentity {
        lhs,
        rhs,
        deviation: (lhs - rhs).norm() / lhs.norm().max(1e-300),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramingIdentity {
    /// `det(f)^{-dim G / 2}`.
    pub lhs: Complex64,
    /// `e^{-i pi eta_theta / 4}`.
    pub rhs: Complex64,
    pub deviation: f64,
    /// `dim G (#{w > 0} - #{w < 0}) / 2` over shifted phases; the identity holds iff it is even.
    pub obstruction: Rational64,
}

impl FramingIdentity {
    pub fn holds_exactly(&self) -> bool {
        self.obstruction.is_integer() && self.obstruction.to_integer() % 2 == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lhs": [self.lhs.re, self.lhs.im],
            "rhs": [self.rhs.re, self.rhs.im],
            "deviation": self.deviation,
            "obstruction": format_r64(&self.obstruction),
        })
    }
}

pub fn framing_identity_check(phases_h10: &[Phase], dim_g: usize) -> FramingIdentity {
    let lhs = framing_correction(phases_h10, -(dim_g as f64) / 2.0);
    let e = EigenPhaseData::new(Vec::new(), phases_h10.to_vec(), dim_g);
    let t = eta_theta(&e).to_f64().unwrap_or(f64::NAN);
    let rhs = Complex64::from_polar(1.0, -PI * t / 4.0);
    let (mut pos, mut neg) = (0i64, 0i64);
    for p in phases_h10 {
        let w = p.shifted();
        if w > Rational64::zero() {
            pos += 1;
        } else if w < Rational64::zero() && w != Rational64::new(-1, 2) {
            neg += 1;
        }
    }
    FramingIdentity {
        lhs,
        rhs,
        deviation: (lhs - rhs).norm(),
        obstruction: Rational64::new(dim_g as i64 * (pos - neg), 2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowInput {
    /// A real lift of `CS(A)`; SF depends on the lift.
    pub cs_lift: Rational64,
    pub rho: Rational64,
    pub h: usize,
    pub dim_g: usize,
    pub b1: usize,
    pub dim_h0: usize,
    pub dim_h1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlow {
    pub value: Rational64,
    pub integral: bool,
    pub cs_lift: Rational64,
}

impl SpectralFlow {
    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "spectral_flow": format_r64(&self.value),
            "spectral_flow_f64": self.value.to_f64(),
            "integral": self.integral,
            "cs_lift": format_r64(&self.cs_lift),
        })
    }
}

/// `SF = -4 h CS + rho/2 - dim G (1 + b1)/2 + (dim H^0 + dim H^1)/2`; non-integral values are flagged.
pub fn spectral_flow(i: &SpectralFlowInput) -> SpectralFlow {
    let r = |n: usize| Rational64::from_integer(n as i64);
    let value = Rational64::from_integer(-4) * r(i.h) * i.cs_lift + i.rho / 2
        - r(i.dim_g) * r(1 + i.b1) / 2
        + r(i.dim_h0 + i.dim_h1) / 2;
    SpectralFlow {
        value,
        integral: value.is_integer(),
        cs_lift: i.cs_lift,
    }
}
