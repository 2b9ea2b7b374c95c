//! Heterotic-Ricci flow right-hand sides and trajectories on left-invariant data.

use crate::error::{Error, Result};
use crate::homogeneous::{build_sample_invariant, build_sample_invariant_form, invariant_curvature, InvariantGeometry, LieAlgebraData};
use crate::kernels as k;
use crate::ode::{self, Event, OdeOptions};
use crate::sample::{field_values, GeometrySample};
use crate::tensor::{h_circ_h, r_circ_r, ric_circ_ric, AltTensor, Metric, SymBilinear};
use serde::{Deserialize, Serialize};

/// Coefficient in front of `H∘H` in the metric equation.
///
/// `Half` gives `ġ = −2Ric + H∘H − 2κR̃∘R̃`, the form the 3D reduction and the
/// soliton system agree with. `Quarter` gives `−2Ric + ½H∘H − 2κR̃∘R̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HhConvention {
    #[default]
    Half,
    Quarter,
}

impl HhConvention {
    pub fn coefficient(self) -> f64 {
        match self {
            HhConvention::Half => 1.0,
            HhConvention::Quarter => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState3 {
    pub algebra: LieAlgebraData,
    pub g: Metric,
    pub f: f64,
    pub t: f64,
}

impl FlowState3 {
    pub fn new(algebra: LieAlgebraData, g: Metric, f: f64) -> Result<FlowState3> {
        if algebra.dim != 3 || g.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: g.dim().max(algebra.dim) });
        }
        if !f.is_finite() {
            return Err(Error::Domain("dilaton density must be finite".into()));
        }
        Ok(FlowState3 { algebra, g, f, t: 0.0 })
    }

    pub fn from_geometry(geom: &InvariantGeometry) -> Result<FlowState3> {
        FlowState3::new(geom.algebra.clone(), geom.metric.clone(), geom.f.unwrap_or(0.0))
    }

    pub fn geometry(&self) -> Result<InvariantGeometry> {
        InvariantGeometry::new(self.algebra.clone(), self.g.clone())?.with_dilaton(self.f)
    }

    /// `H = f ν_g`.
    pub fn h(&self) -> AltTensor {
        self.g.volume_form().scale(self.f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub kappa: f64,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Keep every `stride`-th accepted step in the output.
    pub stride: usize,
    pub hh: HhConvention,
    pub max_steps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { kappa: 0.0, t_end: 1.0, rtol: 1e-10, atol: 1e-12, stride: 1, hh: HhConvention::Half, max_steps: 200_000 }
    }
}

impl FlowParams {
    pub fn new(kappa: f64, t_end: f64) -> Result<FlowParams> {
        let p = FlowParams { kappa, t_end, ..FlowParams::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::Domain(format!("κ must be non-negative, got {}", self.kappa)));
        }
        if !self.t_end.is_finite() {
            return Err(Error::Domain("t_end must be finite".into()));
        }
        if self.stride == 0 {
            return Err(Error::Domain("stride must be positive".into()));
        }
        Ok(())
    }
}

/// 3D reduced right-hand side `(ġ, ḟ)` with the adopted `H∘H` coefficient.
pub fn rhs_3d(state: &FlowState3, kappa: f64) -> Result<(SymBilinear, f64)> {
    rhs_3d_with(state, kappa, HhConvention::Half)
}

pub fn rhs_3d_with(state: &FlowState3, kappa: f64, hh: HhConvention) -> Result<(SymBilinear, f64)> {
    let (_, ric, s) = invariant_curvature(&state.algebra, &state.g)?;
    Ok(rhs_3d_from_ricci(&state.g, &ric, s, state.f, kappa, hh))
}

fn rhs_3d_from_ricci(g: &Metric, ric: &SymBilinear, s: f64, f: f64, kappa: f64, hh: HhConvention) -> (SymBilinear, f64) {
    let f2 = f * f;
    let rr = ric_circ_ric(ric, g);
    let ric_sq = ric.norm_sq(g);
    // H∘H = f²g in 3D, so the convention only moves the f² coefficient on g.
    let hh_coef = hh.coefficient() * f2;
    let c_ric = -(2.0 + kappa * (2.0 * s - f2));
    let c_g = hh_coef + kappa * (s * s - 2.0 * ric_sq - 0.25 * f2 * f2);
    let out: Vec<f64> = (0..9).map(|i| 2.0 * kappa * rr.comps()[i] + c_ric * ric.comps()[i] + c_g * g.comps()[i]).collect();
    let gdot = SymBilinear::symmetrized(3, &out);
    let fdot = -0.5 * gdot.trace(g) * f;
    (gdot, fdot)
}

/// Full right-hand side `(ġ, Ḣ)` for an invariant metric and three-form in any dimension.
pub fn rhs_general(alg: &LieAlgebraData, g: &Metric, h: &AltTensor, kappa: f64, hh: HhConvention) -> Result<(SymBilinear, AltTensor)> {
    if h.degree() != 3 || h.dim() != alg.dim {
        return Err(Error::DimensionMismatch { expected: alg.dim, got: h.dim() });
    }
    let s = build_sample_invariant_form(alg, g, h.comps(), None)?;
    rhs_general_sample(&s, kappa, hh)
}

/// Same as [`rhs_general`] but evaluated pointwise on any sample.
pub fn rhs_general_sample(s: &GeometrySample, kappa: f64, hh: HhConvention) -> Result<(SymBilinear, AltTensor)> {
    s.require_depth(2)?;
    let n = s.dim();
    let g = s.metric();
    let ric = s.ricci();
    let hhf = h_circ_h(&s.h(), &g)?;
    let rr = r_circ_r(&s.torsion_curvature(), &g)?;
    let gdot = ric.scale(-2.0).add(&hhf.scale(hh.coefficient())).add(&rr.scale(-2.0 * kappa));
    let delta = s.codifferential(s.h_jet(), 3);
    let ddelta = field_values(&s.exterior_derivative(&delta, 2));
    let hdot = AltTensor::antisymmetrized(n, 3, &ddelta.iter().map(|x| -x).collect::<Vec<_>>())?;
    Ok((gdot, hdot))
}

/// `dH + κ⟨R̃∧R̃⟩`, with every entry carrying a repeated index set to zero.
pub fn bianchi_residual(s: &GeometrySample, kappa: f64) -> Result<AltTensor> {
    s.require_depth(1)?;
    let n = s.dim();
    let g = s.metric();
    let dh = field_values(&s.exterior_derivative(s.h_jet(), 3));
    let rw = k::r_wedge_r(s.torsion_curvature().comps(), g.inv(), n);
    let mut out: Vec<f64> = dh.iter().zip(&rw).map(|(a, b)| a + kappa * b).collect();
    for (pos, o) in out.iter_mut().enumerate() {
        let idx = k::unflatten(pos, n, 4);
        if (0..4).any(|i| (i + 1..4).any(|j| idx[i] == idx[j])) {
            *o = 0.0;
        }
    }
    AltTensor::new(n, 4, out)
}

/// Bianchi residual for an invariant metric and three-form.
pub fn bianchi_residual_invariant(alg: &LieAlgebraData, g: &Metric, h: &AltTensor, kappa: f64) -> Result<AltTensor> {
    bianchi_residual(&build_sample_invariant_form(alg, g, h.comps(), None)?, kappa)
}

/// `½(|H|² − δφ − κ|R̃|²)`; the Laplacian term vanishes on invariant data.
pub fn dilaton_rhs(geom: &InvariantGeometry, kappa: f64) -> Result<f64> {
    let s = build_sample_invariant(geom)?;
    dilaton_rhs_sample(&s, kappa)
}

pub fn dilaton_rhs_sample(s: &GeometrySample, kappa: f64) -> Result<f64> {
    s.require_depth(1)?;
    let n = s.dim();
    let g = s.metric();
    let h = s.h();
    let h_sq = h.inner(&h, &g);
    let delta_phi = field_values(&s.codifferential(s.phi_jet(), 1))[0];
    let r_sq = k::curvature_norm_sq(s.torsion_curvature().comps(), g.inv(), n);
    Ok(0.5 * (h_sq - delta_phi - kappa * r_sq))
}

// ---- integration ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowEventKind {
    /// `det(g)^{1/3}` fell to the collapse threshold.
    Collapse,
    /// `det(g)^{1/3}` reached the blow-up threshold.
    Divergence,
    /// `|ġ|_g` reached [`FLOW_RATE_MAX`]: a finite-time curvature singularity.
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEvent {
    pub kind: FlowEventKind,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub g: Vec<f64>,
    pub f: f64,
    /// `det(g)^{1/3}`, the homothety factor when `g(0)` is the identity.
    pub volume_scale: f64,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub event: Option<FlowEvent>,
    pub n_steps: usize,
    algebra: LieAlgebraData,
    solution: ode::Solution,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Dense-output state at `t`.
    pub fn state_at(&self, t: f64) -> Result<FlowState3> {
        let y = self.solution.eval(t).ok_or_else(|| Error::Domain(format!("t = {t} outside the trajectory")))?;
        let g = Metric::new(3, unpack_metric(&y))?;
        Ok(FlowState3 { algebra: self.algebra.clone(), g, f: y[6], t })
    }
}

pub const FLOW_COLLAPSE: f64 = 1e-8;
pub const FLOW_BLOWUP: f64 = 1e8;
pub const FLOW_RATE_MAX: f64 = 1e6;

const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pack(g: &Metric, f: f64) -> Vec<f64> {
    let mut y: Vec<f64> = UPPER.iter().map(|&(a, b)| g.at(a, b)).collect();
    y.push(f);
    y
}

fn unpack_metric(y: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; 9];
    for (v, &(a, b)) in y.iter().zip(&UPPER) {
        g[a * 3 + b] = *v;
        g[b * 3 + a] = *v;
    }
    g
}

fn volume_scale(y: &[f64]) -> f64 {
    k::determinant(&unpack_metric(y), 3).cbrt()
}

/// Integrates the 3D reduced flow from `state` to `params.t_end`.
///
/// Stops early when the metric volume collapses or blows up, or when the
/// rate `|ġ|_g` signals a curvature singularity.
pub fn integrate_flow(state: &FlowState3, params: &FlowParams) -> Result<FlowTrajectory> {
    params.validate()?;
    let alg = state.algebra.clone();
    let (kappa, hh) = (params.kappa, params.hh);
    let eval = |y: &[f64]| -> Option<(Metric, SymBilinear, f64)> {
        let g = Metric::new(3, unpack_metric(y)).ok()?;
        let (_, ric, s) = invariant_curvature(&alg, &g).ok()?;
        let (gdot, fdot) = rhs_3d_from_ricci(&g, &ric, s, y[6], kappa, hh);
        Some((g, gdot, fdot))
    };
    let rhs = |_t: f64, y: &[f64]| -> Vec<f64> {
        // A non-SPD trial stage yields NaN, which the stepper rejects.
        let Some((_, gdot, fdot)) = eval(y) else { return vec![f64::NAN; 7] };
        let mut out: Vec<f64> = UPPER.iter().map(|&(a, b)| gdot.at(a, b)).collect();
        out.push(fdot);
        out
    };
    let rate = |y: &[f64]| eval(y).map_or(f64::INFINITY, |(g, gdot, _)| gdot.norm_sq(&g).sqrt());
    let events = vec![
        Event::terminal("singular", |_, y: &[f64]| FLOW_RATE_MAX - rate(y)),
        Event::terminal("collapse", |_, y: &[f64]| volume_scale(y) - FLOW_COLLAPSE),
        Event::terminal("divergence", |_, y: &[f64]| FLOW_BLOWUP - volume_scale(y)),
    ];
    let opts = OdeOptions { rtol: params.rtol, atol: params.atol, max_steps: params.max_steps, ..OdeOptions::default() };
    let sol = ode::integrate(rhs, state.t, &pack(&state.g, state.f), params.t_end, &opts, &events)?;
    let mut pts: Vec<(f64, &[f64])> = vec![(state.t, sol.steps.first().map_or(&sol.y[..], |s| &s.y0[..]))];
    pts.extend(sol.steps.iter().map(|s| (s.t1, &s.y1[..])));
    let last = pts.len() - 1;
    let samples = pts
        .iter()
        .enumerate()
        .filter(|(i, _)| i % params.stride == 0 || *i == last)
        .map(|(_, (t, y))| FlowSample { t: *t, g: unpack_metric(y), f: y[6], volume_scale: volume_scale(y) })
        .collect();
    let event = sol.events.last().map(|e| FlowEvent {
        kind: match e.name {
            "collapse" => FlowEventKind::Collapse,
            "divergence" => FlowEventKind::Divergence,
            _ => FlowEventKind::Singular,
        },
        t: e.t,
    });
    Ok(FlowTrajectory { samples, event, n_steps: last, algebra: state.algebra.clone(), solution: sol })
}
