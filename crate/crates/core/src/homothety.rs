//! Scalar reductions of the 3D flow for metrics that move by homotheties,
//! `g_t = σ_t g` with `f_t = μ σ_t^{-3/2}`.
//!
//! Every right-hand side here is a Laurent polynomial in σ with powers
//! −4..=1, stored as `c[k + 4]`. The ODE is `σ σ' = F(σ)`.
//!
//! Integration runs in a Sundman time τ with state `(ln σ, t)`:
//!
//! ```text
//! d ln σ / dτ = F(σ) / N(σ),   dt / dτ = σ² / N(σ),   N = Σ |c_k| σ^k
//! ```
//!
//! so the log-rate stays in [−1, 1] and both collapse and blow-up are
//! reached in bounded τ.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::homogeneous::{invariant_curvature, LieAlgebraData};
use crate::ode::{self, Event, OdeOptions, Solution};
use crate::par::{self, Execution};
use crate::soliton::ricci_eigenbasis;
use crate::tensor::Metric;

pub const COLLAPSE_EPS: f64 = 1e-8;
pub const BLOWUP: f64 = 1e8;
/// `|F|/N` below which a trajectory is treated as sitting on its asymptote.
pub const STALL_TOL: f64 = 1e-10;
/// Width of the unresolved band around the cubic threshold in μ².
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Relative `|F(σ₀)|/N(σ₀)` below which a problem is static.
pub const STATIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomothetyCase {
    Positive,
    Flat,
    Negative,
}

impl HomothetyCase {
    pub const ALL: [HomothetyCase; 3] = [HomothetyCase::Positive, HomothetyCase::Flat, HomothetyCase::Negative];

    /// Normalized scalar curvature.
    pub fn scalar(self) -> f64 {
        match self {
            HomothetyCase::Positive => 1.0,
            HomothetyCase::Flat => 0.0,
            HomothetyCase::Negative => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HomothetyCase::Positive => "positive",
            HomothetyCase::Flat => "flat",
            HomothetyCase::Negative => "negative",
        }
    }

    /// Static curve `F(κ, μ, 1) = 0` solved for κ.
    pub fn kappa_crit(self, mu: f64) -> f64 {
        match self {
            HomothetyCase::Positive => kappa_crit_p(mu),
            HomothetyCase::Flat => kappa_crit_flat(mu),
            HomothetyCase::Negative => kappa_crit_n(mu),
        }
    }
}

impl fmt::Display for HomothetyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HomothetyCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<HomothetyCase> {
        match s {
            "positive" | "p" => Ok(HomothetyCase::Positive),
            "flat" | "f" => Ok(HomothetyCase::Flat),
            "negative" | "n" => Ok(HomothetyCase::Negative),
            _ => Err(Error::Domain(format!("unknown homothety case `{s}`"))),
        }
    }
}

/// Which σ-equation to use.
///
/// `Printed` is the reduction whose static curves, cubic threshold and
/// closed forms all match the published data. `FlowReduced` is what direct
/// substitution into the 3D flow gives: `2κ Ric∘Ric` carries no σ factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomothetyModel {
    #[default]
    Printed,
    FlowReduced,
}

/// Curvature data of the base metric g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Reduction {
    /// Einstein with scalar curvature `scalar`.
    Einstein { scalar: f64 },
    /// Principal Ricci curvatures; the equation is taken along the first one.
    Diagonal { ricci: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomothetyProblem {
    pub kappa: f64,
    pub mu: f64,
    pub reduction: Reduction,
    pub sigma0: f64,
    pub model: HomothetyModel,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("κ must be finite and ≥ 0, got {kappa}")))
    }
}

impl HomothetyProblem {
    /// Einstein base with scalar curvature `s` (any real).
    pub fn new(kappa: f64, mu: f64, s: f64, sigma0: f64) -> Result<HomothetyProblem> {
        check_kappa(kappa)?;
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(Error::Domain(format!("σ₀ must be positive, got {sigma0}")));
        }
        if !mu.is_finite() || !s.is_finite() {
            return Err(Error::Domain("μ and s must be finite".into()));
        }
        Ok(HomothetyProblem { kappa, mu, reduction: Reduction::Einstein { scalar: s }, sigma0, model: HomothetyModel::Printed })
    }

    pub fn for_case(case: HomothetyCase, kappa: f64, mu: f64) -> Result<HomothetyProblem> {
        HomothetyProblem::new(kappa, mu, case.scalar(), 1.0)
    }

    pub fn diagonal(kappa: f64, mu: f64, ricci: [f64; 3], sigma0: f64) -> Result<HomothetyProblem> {
        let mut p = HomothetyProblem::new(kappa, mu, 0.0, sigma0)?;
        p.reduction = Reduction::Diagonal { ricci };
        Ok(p)
    }

    pub fn with_model(mut self, model: HomothetyModel) -> HomothetyProblem {
        self.model = model;
        self
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> HomothetyProblem {
        self.sigma0 = sigma0;
        self
    }

    /// Laurent coefficients `c[k + 4]` of F.
    pub fn laurent(&self) -> [f64; 6] {
        let (k, mu2) = (self.kappa, self.mu * self.mu);
        let mut c = [0.0; 6];
        c[3] = mu2;
        c[0] = -0.25 * k * mu2 * mu2;
        match (self.reduction, self.model) {
            (Reduction::Einstein { scalar: s }, HomothetyModel::Printed) => {
                c[5] = (2.0 * k * s / 3.0 - 2.0) * s / 3.0;
                c[4] = -k * s * s / 3.0;
                c[2] = -k * s * mu2;
            }
            (Reduction::Einstein { scalar: s }, HomothetyModel::FlowReduced) => {
                c[5] = -2.0 * s / 3.0;
                c[4] = -k * s * s / 9.0;
                c[2] = k * s * mu2 / 3.0;
            }
            (Reduction::Diagonal { ricci }, model) => {
                let l = ricci[0];
                let s: f64 = ricci.iter().sum();
                let r2: f64 = ricci.iter().map(|x| x * x).sum();
                let base = -2.0 * k * s * l + k * (s * s - 2.0 * r2);
                match model {
                    HomothetyModel::Printed => {
                        c[5] = 2.0 * k * l * l - 2.0 * l;
                        c[4] = base;
                    }
                    HomothetyModel::FlowReduced => {
                        c[5] = -2.0 * l;
                        c[4] = base + 2.0 * k * l * l;
                    }
                }
                c[2] = k * mu2 * l;
            }
        }
        c
    }

    /// `F(y) = ½ d(σ²)/dt` at σ = y.
    pub fn rhs(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("σ must be positive, got {y}")));
        }
        Ok(laurent_eval(&self.laurent(), y))
    }

    pub fn rhs_dy(&self, y: f64) -> f64 {
        let c = self.laurent();
        (0..6).map(|i| (i as f64 - 4.0) * c[i] * y.powi(i as i32 - 5)).sum()
    }

    fn normalizer(&self, y: f64) -> f64 {
        let c = self.laurent();
        (0..6).map(|i| c[i].abs() * y.powi(i as i32 - 4)).sum()
    }

    /// Dilaton density along the flow, `f = μ σ^{-3/2}`.
    pub fn dilaton(&self, sigma: f64) -> f64 {
        self.mu * sigma.powf(-1.5)
    }

    pub fn is_static(&self) -> bool {
        let n = self.normalizer(self.sigma0);
        n == 0.0 || laurent_eval(&self.laurent(), self.sigma0).abs() <= STATIC_TOL * n
    }
}

fn laurent_eval(c: &[f64; 6], y: f64) -> f64 {
    (0..6).map(|i| c[i] * y.powi(i as i32 - 4)).sum()
}

/// Right-hand side of the Einstein reduction for arbitrary real `s`.
pub fn f_general(kappa: f64, mu: f64, s: f64, y: f64) -> Result<f64> {
    HomothetyProblem::new(kappa, mu, s, 1.0)?.rhs(y)
}

pub fn f_p(kappa: f64, mu: f64, y: f64) -> Result<f64> {
    f_general(kappa, mu, 1.0, y)
}

pub fn f_flat(kappa: f64, mu: f64, y: f64) -> Result<f64> {
    f_general(kappa, mu, 0.0, y)
}

pub fn f_n(kappa: f64, mu: f64, y: f64) -> Result<f64> {
    f_general(kappa, mu, -1.0, y)
}

pub fn kappa_crit_p(mu: f64) -> f64 {
    let m2 = mu * mu;
    (36.0 * m2 - 24.0) / (9.0 * m2 * (m2 + 4.0) + 4.0)
}

pub fn kappa_crit_n(mu: f64) -> f64 {
    let m2 = mu * mu;
    (36.0 * m2 + 24.0) / (9.0 * m2 * (m2 - 4.0) + 4.0)
}

/// Flat static curve `κμ² = 4`.
pub fn kappa_crit_flat(mu: f64) -> f64 {
    4.0 / (mu * mu)
}

/// `κ_crit^p(μ) ≥ 0` exactly when `μ² ≥ 2/3`.
pub fn kappa_crit_p_admissible(mu: f64) -> bool {
    3.0 * mu * mu >= 2.0
}

/// `(μ₋², μ₊²)`: κ_crit^n is negative or undefined strictly between them.
pub fn negative_band() -> (f64, f64) {
    let r = 2.0 * 2f64.sqrt();
    (2.0 / 3.0 * (3.0 - r), 2.0 / 3.0 * (3.0 + r))
}

pub fn kappa_crit_n_admissible(mu: f64) -> bool {
    let (lo, hi) = negative_band();
    let m2 = mu * mu;
    m2 < lo || m2 > hi
}

pub fn threshold_cubic(x: f64) -> f64 {
    ((27.0 * x + 6.0) * x - 68.0) * x - 8.0
}

/// Positive root of `27x³ + 6x² − 68x − 8`, the μ² threshold of the
/// positive case.
pub fn mu_threshold_cubic() -> f64 {
    let (mut a, mut b) = (1.5, 1.6);
    debug_assert!(threshold_cubic(a) < 0.0 && threshold_cubic(b) > 0.0);
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        if threshold_cubic(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa0 {
    pub kappa0: f64,
    pub y0: f64,
    /// `F_p(κ₀, μ, y₀)` and `∂_y F_p(κ₀, μ, y₀)`.
    pub residual: f64,
    pub residual_dy: f64,
}

/// Upper end of the eternal band of the positive case: the double root of
/// `F_p(·, μ, ·)` with `y₀ ∈ (0, 1)`.
///
/// `F_p = A(y) + κ B(y)` is affine in κ, so its roots in y are the level
/// sets of `k(y) = −A/B`; κ₀ is the largest interior local maximum of k.
pub fn kappa0(mu: f64) -> Result<Kappa0> {
    let m2 = mu * mu;
    let a = |y: f64| -2.0 * y / 3.0 + m2 / y;
    let da = |y: f64| -2.0 / 3.0 - m2 / (y * y);
    let b = |y: f64| 2.0 * y / 9.0 - 1.0 / 3.0 - m2 / (y * y) - m2 * m2 / (4.0 * y.powi(4));
    let db = |y: f64| 2.0 / 9.0 + 2.0 * m2 / y.powi(3) + m2 * m2 / y.powi(5);
    // sign of −k'(y)·B²
    let h = |y: f64| da(y) * b(y) - a(y) * db(y);
    let k = |y: f64| -a(y) / b(y);

    let (lo, hi, n) = (0.01, 1.0 - 1e-9, 4000);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let mut best: Option<(f64, f64)> = None;
    for w in grid.windows(2) {
        let (h0, h1) = (h(w[0]), h(w[1]));
        // k' goes from + to −, i.e. h from − to +
        if !(h0 < 0.0 && h1 >= 0.0) {
            continue;
        }
        let (mut x0, mut x1) = (w[0], w[1]);
        for _ in 0..200 {
            let m = 0.5 * (x0 + x1);
            if h(m) < 0.0 {
                x0 = m;
            } else {
                x1 = m;
            }
            if x1 - x0 <= 1e-16 {
                break;
            }
        }
        let y = 0.5 * (x0 + x1);
        let kv = k(y);
        if kv > 0.0 && best.is_none_or(|(_, kb)| kv > kb) {
            best = Some((y, kv));
        }
    }
    let (y0, kappa0) = best.ok_or_else(|| Error::NoRootInBand(format!("no double root of F_p in (0, 1) for μ = {mu}")))?;
    Ok(Kappa0 { kappa0, y0, residual: a(y0) + kappa0 * b(y0), residual_dy: da(y0) + kappa0 * db(y0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    Lower,
}

/// Lambert W by Halley iteration, `w e^w = x`.
pub fn lambert_w(x: f64, branch: Branch) -> Result<f64> {
    let em1 = -(-1f64).exp();
    if !x.is_finite() {
        return Err(Error::Domain(format!("W({x}) is undefined")));
    }
    if x < em1 {
        // tolerate roundoff in arguments built to hit the branch point
        if x >= em1 * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("W({x}): argument below −1/e")));
    }
    if x == em1 {
        return Ok(-1.0);
    }
    match branch {
        Branch::Principal if x == 0.0 => return Ok(0.0),
        Branch::Lower if x >= 0.0 => return Err(Error::Domain(format!("W₋₁({x}): needs −1/e ≤ x < 0"))),
        _ => {}
    }
    let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
    let mut w = match branch {
        Branch::Principal if x < -0.25 => -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p.powi(3),
        Branch::Principal if x < 3.0 => 0.5 * x.ln_1p(),
        Branch::Principal => {
            let l1 = x.ln();
            l1 - l1.ln()
        }
        Branch::Lower if x < -0.25 => -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p.powi(3),
        Branch::Lower => {
            let l1 = (-x).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    };
    for _ in 0..64 {
        let ew = w.exp();
        let r = w * ew - x;
        if r == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let dw = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1));
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// `W₀(e^L)` without forming `e^L`; stable for large L.
fn w0_of_exp(l: f64) -> f64 {
    if l < 1.0 {
        return lambert_w(l.exp(), Branch::Principal).expect("positive argument");
    }
    let mut w = l - l.ln();
    for _ in 0..64 {
        let r = w + w.ln() - l;
        let dw = r / (1.0 + 1.0 / w);
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

fn flat_b(kappa: f64, mu: f64) -> f64 {
    4.0 / (kappa * mu * mu) - 1.0
}

/// Flat-case closed form with σ(0) = 1.
pub fn flat_closed_form(kappa: f64, mu: f64, t: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if mu == 0.0 {
        return Ok(1.0);
    }
    if kappa == 0.0 {
        let a = 1.0 + 3.0 * t * mu * mu;
        if a <= 0.0 {
            return Err(Error::Domain(format!("t = {t} precedes the birth time {}", -1.0 / (3.0 * mu * mu))));
        }
        return Ok(a.cbrt());
    }
    let b = flat_b(kappa, mu);
    // κμ² = 4 up to rounding of μ²
    if b.abs() <= 8.0 * f64::EPSILON {
        return Ok(1.0);
    }
    let scale = (0.25 * kappa * mu * mu).cbrt();
    let s = 12.0 * t / kappa + b;
    let w = if b > 0.0 {
        w0_of_exp(b.ln() + s)
    } else {
        let ts = flat_collapse_time(kappa, mu).expect("b < 0");
        if t > ts {
            return Err(Error::Domain(format!("t = {t} is past the collapse time {ts}")));
        }
        lambert_w(b * s.exp(), Branch::Principal)?
    };
    Ok(scale * (1.0 + w).max(0.0).cbrt())
}

/// `t_* = −κ/12 (1 + b + ln(−b))` when `b < 0`.
pub fn flat_collapse_time(kappa: f64, mu: f64) -> Option<f64> {
    if kappa <= 0.0 || mu == 0.0 {
        return None;
    }
    let b = flat_b(kappa, mu);
    (b < 0.0).then(|| -kappa / 12.0 * (1.0 + b + (-b).ln()))
}

/// Time at which the flat closed form passes through σ.
pub fn flat_closed_form_inverse(kappa: f64, mu: f64, sigma: f64) -> Option<f64> {
    if mu == 0.0 || sigma <= 0.0 {
        return None;
    }
    if kappa == 0.0 {
        return Some((sigma.powi(3) - 1.0) / (3.0 * mu * mu));
    }
    let b = flat_b(kappa, mu);
    let w = 4.0 * sigma.powi(3) / (kappa * mu * mu) - 1.0;
    if b == 0.0 || w / b <= 0.0 {
        return None;
    }
    Some(kappa / 12.0 * ((w / b).ln() + w - b))
}

/// The SU(2) example: `σ σ' = (4σ − 12)/κ` with σ(0) = 1.
pub fn su2_closed_form(kappa: f64, t: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain("κ must be positive".into()));
    }
    let tm = su2_t_max(kappa);
    if t > tm * (1.0 + 1e-15) + 1e-300 {
        return Err(Error::Domain(format!("t = {t} is past t_max = {tm}")));
    }
    let arg = -2.0 / 3.0 * (2.0 / 3.0 * (2.0 * t / kappa - 1.0)).exp();
    Ok((3.0 + 3.0 * lambert_w(arg, Branch::Principal)?).max(0.0))
}

pub fn su2_t_max(kappa: f64) -> f64 {
    kappa / 4.0 * ((27.0f64 / 8.0).ln() - 1.0)
}

pub fn su2_closed_form_inverse(kappa: f64, sigma: f64) -> Option<f64> {
    if !(sigma > 0.0 && sigma < 3.0) {
        return None;
    }
    let w = sigma / 3.0 - 1.0;
    Some(kappa / 2.0 * (1.0 + 1.5 * ((-1.5 * w).ln() + w)))
}

/// The SU(2) metric of the example as a diagonal problem with μ = 0.
pub fn su2_problem(kappa: f64) -> Result<HomothetyProblem> {
    HomothetyProblem::diagonal(kappa, 0.0, [-1.0 / kappa, -1.0 / kappa, 2.0 / kappa], 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorTag {
    Static,
    EternalRegular,
    EternalPastFiniteFutureDivergent,
    EternalPastDivergentFutureFinite,
    FiniteTimeCollapse,
    PastCollapseFutureDivergent,
    PastCollapseFutureFinite,
    Unresolved,
}

impl BehaviorTag {
    pub const ALL: [BehaviorTag; 8] = [
        BehaviorTag::Static,
        BehaviorTag::EternalRegular,
        BehaviorTag::EternalPastFiniteFutureDivergent,
        BehaviorTag::EternalPastDivergentFutureFinite,
        BehaviorTag::FiniteTimeCollapse,
        BehaviorTag::PastCollapseFutureDivergent,
        BehaviorTag::PastCollapseFutureFinite,
        BehaviorTag::Unresolved,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BehaviorTag::Static => "static",
            BehaviorTag::EternalRegular => "eternal-regular",
            BehaviorTag::EternalPastFiniteFutureDivergent => "eternal-past-finite-future-divergent",
            BehaviorTag::EternalPastDivergentFutureFinite => "eternal-past-divergent-future-finite",
            BehaviorTag::FiniteTimeCollapse => "finite-time-collapse",
            BehaviorTag::PastCollapseFutureDivergent => "past-collapse-future-divergent",
            BehaviorTag::PastCollapseFutureFinite => "past-collapse-future-finite",
            BehaviorTag::Unresolved => "unresolved",
        }
    }

    pub fn is_eternal(self) -> bool {
        matches!(
            self,
            BehaviorTag::Static
                | BehaviorTag::EternalRegular
                | BehaviorTag::EternalPastFiniteFutureDivergent
                | BehaviorTag::EternalPastDivergentFutureFinite
        )
    }
}

impl fmt::Display for BehaviorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fate of a trajectory in one time direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum End {
    /// Tends to a positive root of F.
    Finite(f64),
    /// σ → ∞, which always takes infinite time.
    Divergent,
    /// σ → 0 at a finite time (`None` before integration fixes it).
    Collapse(Option<f64>),
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Behavior {
    pub tag: BehaviorTag,
    /// `lim σ_t` as t → −∞ and t → +∞, when finite.
    pub past_limit: Option<f64>,
    pub future_limit: Option<f64>,
    /// Signed collapse time; negative for a singularity in the past.
    pub collapse_time: Option<f64>,
}

impl Behavior {
    pub fn from_ends(past: End, future: End) -> Behavior {
        use BehaviorTag as T;
        use End::*;
        let lim = |e: End| if let Finite(y) = e { Some(y) } else { None };
        let ct = |e: End| if let Collapse(t) = e { t } else { None };
        let tag = match (past, future) {
            (Finite(_), Finite(_)) => T::EternalRegular,
            (Finite(_), Divergent) => T::EternalPastFiniteFutureDivergent,
            (Divergent, Finite(_)) => T::EternalPastDivergentFutureFinite,
            (Finite(_) | Divergent, Collapse(_)) => T::FiniteTimeCollapse,
            (Collapse(_), Divergent) => T::PastCollapseFutureDivergent,
            (Collapse(_), Finite(_)) => T::PastCollapseFutureFinite,
            _ => T::Unresolved,
        };
        Behavior { tag, past_limit: lim(past), future_limit: lim(future), collapse_time: ct(future).or(ct(past)) }
    }

    pub fn static_at(sigma: f64) -> Behavior {
        Behavior { tag: BehaviorTag::Static, past_limit: Some(sigma), future_limit: Some(sigma), collapse_time: None }
    }

    pub fn unresolved() -> Behavior {
        Behavior { tag: BehaviorTag::Unresolved, past_limit: None, future_limit: None, collapse_time: None }
    }
}

/// Positive roots of F in `[COLLAPSE_EPS, BLOWUP]`, ascending.
///
/// Sign changes of `y⁴F(y)` on a log grid, refined by bisection. Tangential
/// double roots are not reported; they only occur on boundary curves.
pub fn positive_roots(p: &HomothetyProblem) -> Vec<f64> {
    let c = p.laurent();
    let poly = |y: f64| (0..6).map(|i| c[i] * y.powi(i as i32)).sum::<f64>();
    let (l0, l1) = (COLLAPSE_EPS.ln(), BLOWUP.ln());
    let n = 3200;
    let mut pts: Vec<f64> = (0..=n).map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp()).collect();
    pts.push(p.sigma0);
    pts.sort_by(f64::total_cmp);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (pa, pb) = (poly(a), poly(b));
        if pa == 0.0 {
            if roots.last().is_none_or(|&r: &f64| (r - a).abs() > 1e-14 * a) {
                roots.push(a);
            }
            continue;
        }
        if pa.signum() == pb.signum() || pb == 0.0 {
            continue;
        }
        let sa = pa.signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if poly(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if let Some(&last) = pts.last() {
        if poly(last) == 0.0 {
            roots.push(last);
        }
    }
    roots
}

/// Past and future ends from the sign of F at σ₀ and the neighbouring roots.
pub fn ends_by_roots(p: &HomothetyProblem) -> (End, End) {
    if p.is_static() {
        return (End::Finite(p.sigma0), End::Finite(p.sigma0));
    }
    let roots = positive_roots(p);
    let s0 = p.sigma0;
    let above = roots.iter().copied().find(|&r| r > s0);
    let below = roots.iter().copied().rev().find(|&r| r < s0);
    let f0 = laurent_eval(&p.laurent(), s0);
    if f0 > 0.0 {
        (below.map_or(End::Collapse(None), End::Finite), above.map_or(End::Divergent, End::Finite))
    } else {
        (above.map_or(End::Divergent, End::Finite), below.map_or(End::Collapse(None), End::Finite))
    }
}

/// Root/sign classification, with the collapse time filled in by
/// integration when the trajectory collapses.
pub fn classify_problem(p: &HomothetyProblem) -> Result<Behavior> {
    if p.is_static() {
        return Ok(Behavior::static_at(p.sigma0));
    }
    let (past, future) = ends_by_roots(p);
    let mut b = Behavior::from_ends(past, future);
    if matches!(past, End::Collapse(_)) || matches!(future, End::Collapse(_)) {
        let traj = integrate(p, (f64::NEG_INFINITY, f64::INFINITY), &IntegrationOptions::default())?;
        b.collapse_time = traj.collapse_time();
    }
    Ok(b)
}

/// Classification of the normalized problem `(case, κ, μ)` with σ₀ = 1.
pub fn classify(case: HomothetyCase, kappa: f64, mu: f64) -> Result<Behavior> {
    let p = HomothetyProblem::for_case(case, kappa, mu)?;
    if case == HomothetyCase::Positive && !p.is_static() {
        let x = mu_threshold_cubic();
        if kappa > kappa_crit_p(mu).max(0.0) && (mu * mu - x).abs() <= BOUNDARY_TOL {
            return Ok(Behavior::unresolved());
        }
    }
    classify_problem(&p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Bound on |τ| in each direction.
    pub tau_max: f64,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { rtol: 1e-11, atol: 1e-13, tau_max: 1e6, max_steps: 100_000 }
    }
}

impl IntegrationOptions {
    pub fn with_tol(tol: f64) -> IntegrationOptions {
        IntegrationOptions { rtol: tol, atol: tol * 1e-2, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Collapse,
    Divergence,
    /// Approach to an interior root of F.
    Stall,
    /// End of the requested time span.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomothetyEvent {
    pub kind: EventKind,
    pub t: f64,
    pub sigma: f64,
}

/// Both halves of an integrated homothety flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub problem: HomothetyProblem,
    /// `(t, σ)` at every accepted step, ascending in t.
    pub samples: Vec<(f64, f64)>,
    pub past: Option<HomothetyEvent>,
    pub future: Option<HomothetyEvent>,
    /// Sum of local error estimates, mapped to σ at the two endpoints.
    pub error_estimate: f64,
    forward: Option<Solution>,
    backward: Option<Solution>,
}

impl Trajectory {
    pub fn collapse_time(&self) -> Option<f64> {
        [self.future, self.past].into_iter().flatten().find(|e| e.kind == EventKind::Collapse).map(|e| e.t)
    }

    /// σ at time t via the dense output, inverting t(τ) by bisection.
    pub fn sigma_at(&self, t: f64) -> Option<f64> {
        if self.forward.is_none() && self.backward.is_none() {
            let (lo, hi) = (self.samples.first()?.0, self.samples.last()?.0);
            return (t >= lo && t <= hi).then_some(self.problem.sigma0);
        }
        let sol = if t >= 0.0 { self.forward.as_ref()? } else { self.backward.as_ref()? };
        for st in &sol.steps {
            let (ta, tb) = (st.y0[1], st.y1[1]);
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            if t < lo || t > hi {
                continue;
            }
            let (mut a, mut b) = (st.t0, st.t1);
            let inc = tb >= ta;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                let tm = st.eval(m)[1];
                if (tm < t) == inc {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(st.eval(0.5 * (a + b))[0].exp());
        }
        None
    }

    /// Behavior read off the terminating events alone.
    pub fn behavior(&self) -> Behavior {
        if self.forward.is_none() && self.backward.is_none() {
            return Behavior::static_at(self.problem.sigma0);
        }
        let end = |e: Option<HomothetyEvent>| match e {
            Some(HomothetyEvent { kind: EventKind::Collapse, t, .. }) => End::Collapse(Some(t)),
            Some(HomothetyEvent { kind: EventKind::Divergence, .. }) => End::Divergent,
            Some(HomothetyEvent { kind: EventKind::Stall, sigma, .. }) => End::Finite(polish_root(&self.problem, sigma)),
            _ => End::Unknown,
        };
        Behavior::from_ends(end(self.past), end(self.future))
    }
}

fn polish_root(p: &HomothetyProblem, mut y: f64) -> f64 {
    for _ in 0..20 {
        let d = p.rhs_dy(y);
        if d == 0.0 {
            break;
        }
        let step = laurent_eval(&p.laurent(), y) / d;
        if !step.is_finite() || step.abs() > 0.1 * y {
            break;
        }
        y -= step;
        if step.abs() <= 1e-15 * y {
            break;
        }
    }
    y
}

/// Integrate forward to `t_span.1` and backward to `t_span.0` (either may
/// be infinite), stopping at collapse, blow-up or an asymptote.
pub fn integrate(p: &HomothetyProblem, t_span: (f64, f64), opts: &IntegrationOptions) -> Result<Trajectory> {
    if !(t_span.0 <= 0.0 && t_span.1 >= 0.0) {
        return Err(Error::Domain("the time span must contain t = 0".into()));
    }
    if p.is_static() {
        let lo = if t_span.0.is_finite() { t_span.0 } else { -1.0 };
        let hi = if t_span.1.is_finite() { t_span.1 } else { 1.0 };
        return Ok(Trajectory {
            problem: *p,
            samples: vec![(lo, p.sigma0), (0.0, p.sigma0), (hi, p.sigma0)],
            past: None,
            future: None,
            error_estimate: 0.0,
            forward: None,
            backward: None,
        });
    }
    let c = p.laurent();
    let norm = |y: f64| (0..6).map(|i| c[i].abs() * y.powi(i as i32 - 4)).sum::<f64>();
    let rhs = |_: f64, s: &[f64]| {
        let y = s[0].exp();
        let n = norm(y);
        vec![laurent_eval(&c, y) / n, y * y / n]
    };
    let ode_opts = OdeOptions { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps, ..Default::default() };
    let y0 = [p.sigma0.ln(), 0.0];

    let run = |dir: f64, t_end: f64| -> Result<(Solution, Option<HomothetyEvent>)> {
        let events = [
            Event::terminal("collapse", |_, s: &[f64]| s[0] - COLLAPSE_EPS.ln()),
            Event::terminal("divergence", |_, s: &[f64]| BLOWUP.ln() - s[0]),
            Event::terminal("stall", |_, s: &[f64]| {
                let y = s[0].exp();
                (laurent_eval(&c, y) / norm(y)).abs() - STALL_TOL
            }),
            Event::terminal("horizon", move |_, s: &[f64]| (t_end - s[1]) * dir),
        ];
        let n_events = if t_end.is_finite() { 4 } else { 3 };
        let sol = ode::integrate(rhs, 0.0, &y0, dir * opts.tau_max, &ode_opts, &events[..n_events])?;
        let ev = sol.events.last().map(|e| HomothetyEvent {
            kind: match e.name {
                "collapse" => EventKind::Collapse,
                "divergence" => EventKind::Divergence,
                "stall" => EventKind::Stall,
                _ => EventKind::Horizon,
            },
            t: e.y[1],
            sigma: e.y[0].exp(),
        });
        Ok((sol, ev))
    };
    let (fw, future) = if t_span.1 > 0.0 { run(1.0, t_span.1).map(|(s, e)| (Some(s), e))? } else { (None, None) };
    let (bw, past) = if t_span.0 < 0.0 { run(-1.0, t_span.0).map(|(s, e)| (Some(s), e))? } else { (None, None) };

    let mut samples: Vec<(f64, f64)> = vec![(0.0, p.sigma0)];
    let mut error_estimate = 0.0f64;
    for sol in [&fw, &bw].into_iter().flatten() {
        samples.extend(sol.steps.iter().map(|st| (st.y1[1], st.y1[0].exp())));
        let y = sol.y[0].exp();
        let rate = laurent_eval(&c, y) / (y * y);
        error_estimate = error_estimate.max(y * (sol.err_sum[0] + rate.abs() * sol.err_sum[1]));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    Ok(Trajectory { problem: *p, samples, past, future, error_estimate, forward: fw, backward: bw })
}

/// Classification from integration events only.
pub fn classify_by_integration(p: &HomothetyProblem, opts: &IntegrationOptions) -> Result<Behavior> {
    Ok(integrate(p, (f64::NEG_INFINITY, f64::INFINITY), opts)?.behavior())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomothetyConsistency {
    pub pass: bool,
    pub einstein: bool,
    /// Principal Ricci curvatures, ascending.
    pub eigenvalues: [f64; 3],
    pub scalar: f64,
    /// The constant `λ_i + λ_j` the pairwise relations force, when one exists.
    pub f_t: Option<f64>,
    pub pair_sums: Vec<f64>,
    pub defect: f64,
}

/// Whether `σ_t g` can be a non-static homothety flow.
///
/// Subtracting the σ-equation along two principal directions gives
/// `λ_i + λ_j = F_t` whenever `λ_i ≠ λ_j`. Under the printed reduction
/// `F_t = 1/κ + s/σ − μ²/(2σ³)`, constant only when `s = μ = 0`. Under the
/// flow-reduced one `F_t = σ/κ + s − μ²/(2σ²)` is never constant.
pub fn check_homothety_consistency(
    alg: &LieAlgebraData,
    g: &Metric,
    kappa: f64,
    mu: f64,
    model: HomothetyModel,
) -> Result<HomothetyConsistency> {
    check_kappa(kappa)?;
    if alg.dim != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: alg.dim });
    }
    let (_, ric, s) = invariant_curvature(alg, g)?;
    let (vals, _) = ricci_eigenbasis(g, &ric);
    let ev = [vals[0], vals[1], vals[2]];
    let scale = ev.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let einstein = ev[2] - ev[0] <= tol;
    let mut pair_sums = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            if (ev[j] - ev[i]).abs() > tol {
                pair_sums.push(ev[i] + ev[j]);
            }
        }
    }
    let (pass, f_t, defect) = if einstein {
        (true, None, ev[2] - ev[0])
    } else {
        match model {
            HomothetyModel::Printed if kappa > 0.0 => {
                let ft = 1.0 / kappa;
                let d = pair_sums.iter().map(|x| (x - ft).abs()).fold(s.abs().max(mu.abs()), f64::max);
                (d <= tol.max(1e-9 * ft), Some(ft), d)
            }
            _ => (false, None, ev[2] - ev[0]),
        }
    };
    Ok(HomothetyConsistency { pass, einstein, eigenvalues: ev, scalar: s, f_t, pair_sums, defect })
}

/// Homothety problem for an invariant base metric, if consistent.
pub fn problem_for_metric(alg: &LieAlgebraData, g: &Metric, kappa: f64, mu: f64, model: HomothetyModel) -> Result<HomothetyProblem> {
    let c = check_homothety_consistency(alg, g, kappa, mu, model)?;
    if !c.pass {
        return Err(Error::Domain(format!("{} metric is not a homothety base (defect {:.3e})", alg.name, c.defect)));
    }
    let p = if c.einstein {
        HomothetyProblem::new(kappa, mu, c.scalar, 1.0)?
    } else {
        HomothetyProblem::diagonal(kappa, mu, c.eigenvalues, 1.0)?
    };
    Ok(p.with_model(model))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub kappa: f64,
    pub mu: f64,
    pub behavior: Behavior,
    /// Tag from integration alone, when cross-checking was requested.
    pub integrated: Option<BehaviorTag>,
}

/// Uniform grid `lo..=hi` with `n` points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Classify every `(κ_i, μ_j)`; rows follow κ, columns follow μ.
pub fn sweep(case: HomothetyCase, kappas: &[f64], mus: &[f64], cross_check: bool, exec: Execution) -> Result<Vec<SweepCell>> {
    let cells: Vec<(usize, usize)> = (0..kappas.len()).flat_map(|i| (0..mus.len()).map(move |j| (i, j))).collect();
    let out = par::map(&cells, exec, |&(i, j)| -> Result<SweepCell> {
        let (kappa, mu) = (kappas[i], mus[j]);
        let behavior = classify(case, kappa, mu)?;
        let integrated = if cross_check {
            let p = HomothetyProblem::for_case(case, kappa, mu)?;
            Some(classify_by_integration(&p, &IntegrationOptions::default())?.tag)
        } else {
            None
        };
        Ok(SweepCell { i, j, kappa, mu, behavior, integrated })
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_values() {
        assert!((f_p(1.0, 1.0, 1.0).unwrap() + 37.0 / 36.0).abs() < 1e-15);
        assert_eq!(f_n(6.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(f_p(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn su2_problem_matches_example_ode() {
        let p = su2_problem(0.7).unwrap();
        for y in [0.3, 1.0, 2.5] {
            assert!((p.rhs(y).unwrap() - (4.0 * y - 12.0) / 0.7).abs() < 1e-12);
        }
    }
}
