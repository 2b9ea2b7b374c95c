//! Residuals of the soliton system, its strong condition, the divergence
//! identities behind it, and the three-dimensional constant-dilaton theory.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homogeneous::{build_sample_invariant, catalog, invariant_connection_curvature, InvariantGeometry};
use crate::identities::rgh_circ_closed_form;
use crate::jet::Jet;
use crate::kernels as k;
use crate::sample::{field_values, Field, GeometrySample};
use crate::tensor::{hodge_star, ric_circ_ric, AltTensor, Metric, SymBilinear};

pub const SCHEMA_VERSION: u32 = 1;

/// Constructors hit this on algebraically exact data.
pub const EXACT_TOL: f64 = 1e-12;
/// Soliton identities evaluated on chart jets.
pub const JET_IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance for matching Ricci spectra.
pub const SPECTRUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Named residual magnitudes; serializes as `name -> {value, tol, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    pub residuals: BTreeMap<String, Residual>,
}

impl Default for ResidualReport {
    fn default() -> Self {
        ResidualReport { schema_version: SCHEMA_VERSION, residuals: BTreeMap::new() }
    }
}

impl ResidualReport {
    pub fn new() -> ResidualReport {
        ResidualReport::default()
    }

    pub fn push(&mut self, name: &str, value: f64, tol: f64) {
        let pass = value.is_finite() && value <= tol;
        self.residuals.insert(name.to_string(), Residual { value, tol, pass });
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.residuals.get(name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |r| r.value)
    }

    pub fn passed(&self) -> bool {
        self.residuals.values().all(|r| r.pass)
    }

    /// Copy every entry of `other` under `prefix.name`.
    pub fn merge(&mut self, prefix: &str, other: &ResidualReport) {
        for (name, r) in &other.residuals {
            self.residuals.insert(format!("{prefix}.{name}"), *r);
        }
    }
}

/// `(g, φ, H)` at a sample point plus the coupling κ.
#[derive(Debug, Clone)]
pub struct SolitonCandidate {
    pub sample: GeometrySample,
    pub kappa: f64,
    pub geometry: Option<InvariantGeometry>,
}

impl SolitonCandidate {
    pub fn new(sample: GeometrySample, kappa: f64) -> Result<SolitonCandidate> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
        }
        Ok(SolitonCandidate { sample, kappa, geometry: None })
    }

    pub fn from_invariant(geom: InvariantGeometry, kappa: f64) -> Result<SolitonCandidate> {
        let sample = build_sample_invariant(&geom)?;
        let mut c = SolitonCandidate::new(sample, kappa)?;
        c.geometry = Some(geom);
        Ok(c)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `Σ a_{i..} b^{i..}` with every slot of `b` raised.
fn contract_full(a: &[f64], b: &[f64], rank: usize, ginv: &[f64], n: usize) -> f64 {
    let slots: Vec<usize> = (0..rank).collect();
    let br = k::raise_slots(b, rank, &slots, ginv, n);
    a.iter().zip(&br).map(|(x, y)| x * y).sum()
}

/// Which connection differentiates the form slots of `R^{g,H}` in `∇^{g,H*}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointConvention {
    /// Levi-Civita on the form pair, torsion connection on the endomorphism pair.
    Mixed,
    /// Torsion connection on all four slots.
    Torsion,
}

pub const ADJOINT: AdjointConvention = AdjointConvention::Torsion;

/// Every quantity entering the soliton equations at one point.
#[derive(Debug, Clone)]
pub struct Equations {
    pub n: usize,
    pub kappa: f64,
    pub metric: Metric,
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    pub rgh: Vec<f64>,
    pub h_circ_h: Vec<f64>,
    pub rgh_circ_rgh: Vec<f64>,
    pub rgh_wedge_rgh: Vec<f64>,
    /// `E_E^s`, `E_E^a`, `E_D`, `E_B`.
    pub einstein_sym: Vec<f64>,
    pub einstein_skew: Vec<f64>,
    pub dilaton: f64,
    pub bianchi: Vec<f64>,
    /// `Ric^{g,H} + ∇^{g,H}φ + κ R^{g,H}∘R^{g,H}` from the torsion connection directly.
    pub einstein_full: Vec<f64>,
    /// `∇^{g,H*}R^{g,H}` and `∇^{g,H*}R^{g,H} + φ⌟R^{g,H}` as `[b][c][d]`.
    pub adjoint_rgh: Vec<f64>,
    pub strong: Vec<f64>,
    // one-forms
    pub div_rr: Vec<f64>,
    pub div_hh: Vec<f64>,
    pub div_es: Vec<f64>,
    pub grad_rgh_sq: Vec<f64>,
    pub grad_h_sq: Vec<f64>,
    pub grad_trace_es: Vec<f64>,
    pub grad_dilaton: Vec<f64>,
}

fn values(f: &[Jet]) -> Vec<f64> {
    field_values(f)
}

impl Equations {
    pub fn evaluate(s: &GeometrySample, kappa: f64) -> Result<Equations> {
        Equations::evaluate_with(s, kappa, ADJOINT)
    }

    pub fn evaluate_with(s: &GeometrySample, kappa: f64, adjoint: AdjointConvention) -> Result<Equations> {
        s.require_depth(2)?;
        let n = s.dim();
        let ginv_j = s.ginv_jet();
        let gamma = s.gamma_jet();
        let tg = s.torsion_gamma_jet();
        let h_j = s.h_jet();
        let phi_j = s.phi_jet();

        let rgh_j = s.curvature_of(&tg);
        let ric_j = k::ricci(&s.riemann_jet(), ginv_j, n);
        let hh_j = k::h_circ_h(h_j, ginv_j, n);
        let rr_j = k::r_circ_r(&rgh_j, ginv_j, n);
        let nphi_j = s.cov_deriv(phi_j, 1);
        let sym_nphi = k::sym2(&nphi_j, n);

        let mut es_j: Field = Vec::with_capacity(n * n);
        for i in 0..n * n {
            let mut x = ric_j[i].clone();
            x.add_scaled(&sym_nphi[i], 1.0);
            x.add_scaled(&hh_j[i], -0.5);
            x.add_scaled(&rr_j[i], kappa);
            es_j.push(x);
        }
        let tr_es_j = k::trace(&es_j, ginv_j, n);

        let delta_phi_j = k::trace(&nphi_j, ginv_j, n).scale(-1.0);
        let phi_sq_j = k::form_inner(phi_j, phi_j, 1, ginv_j, n);
        let h_sq_j = k::form_inner(h_j, h_j, 3, ginv_j, n);
        let rgh_sq_j = k::curvature_norm_sq(&rgh_j, ginv_j, n);
        let mut ed_j = delta_phi_j.clone();
        ed_j.add_scaled(&phi_sq_j, 1.0);
        ed_j.add_scaled(&h_sq_j, -1.0);
        ed_j.add_scaled(&rgh_sq_j, kappa);

        let metric = s.metric();
        let ginv = metric.inv().to_vec();
        let h = values(h_j);
        let phi = values(phi_j);
        let phi_up = k::sharp(&phi, &ginv, n);
        let rgh = values(&rgh_j);

        // E^a = ½ δH + ½ φ⌟H
        let delta_h = values(&s.codifferential(h_j, 3));
        let phi_h = k::interior(&phi_up, &h, 3, n);
        let einstein_skew: Vec<f64> = delta_h.iter().zip(&phi_h).map(|(a, b)| 0.5 * (a + b)).collect();

        let rw = k::r_wedge_r(&rgh, &ginv, n);
        let dh = values(&s.exterior_derivative(h_j, 3));
        let bianchi: Vec<f64> = dh.iter().zip(&rw).map(|(a, b)| a + kappa * b).collect();

        let ric_gh = k::ricci(&rgh, &ginv, n);
        let tnphi = values(&s.cov_deriv_with(phi_j, 1, &tg));
        let rr = values(&rr_j);
        let einstein_full: Vec<f64> = (0..n * n).map(|i| ric_gh[i] + tnphi[i] + kappa * rr[i]).collect();

        let conns: Vec<&[Jet]> = match adjoint {
            AdjointConvention::Mixed => vec![gamma, gamma, &tg, &tg],
            AdjointConvention::Torsion => vec![&tg, &tg, &tg, &tg],
        };
        let nr = values(&s.cov_deriv_mixed(&rgh_j, 4, &conns));
        let n3 = k::pow(n, 3);
        let mut adjoint_rgh = vec![0.0; n3];
        for i in 0..n {
            for a in 0..n {
                let gia = ginv[i * n + a];
                let base = (i * n + a) * n3;
                for (o, x) in adjoint_rgh.iter_mut().zip(&nr[base..base + n3]) {
                    *o -= gia * x;
                }
            }
        }
        let phi_r = k::interior(&phi_up, &rgh, 4, n);
        let strong: Vec<f64> = adjoint_rgh.iter().zip(&phi_r).map(|(a, b)| a + b).collect();

        let div2 = |t: &Field| -> Vec<f64> {
            let nab = values(&s.cov_deriv(t, 2));
            (0..n)
                .map(|v| {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for a in 0..n {
                            acc -= ginv[i * n + a] * nab[(i * n + a) * n + v];
                        }
                    }
                    acc
                })
                .collect()
        };
        let grad = |x: &Jet| -> Vec<f64> { (0..n).map(|a| s.deriv(x, a).value()).collect() };

        Ok(Equations {
            n,
            kappa,
            h_circ_h: values(&hh_j),
            rgh_circ_rgh: rr,
            rgh_wedge_rgh: rw,
            einstein_sym: values(&es_j),
            einstein_skew,
            dilaton: ed_j.value(),
            bianchi,
            einstein_full,
            adjoint_rgh,
            strong,
            div_rr: div2(&rr_j),
            div_hh: div2(&hh_j),
            div_es: div2(&es_j),
            grad_rgh_sq: grad(&rgh_sq_j),
            grad_h_sq: grad(&h_sq_j),
            grad_trace_es: grad(&tr_es_j),
            grad_dilaton: grad(&ed_j),
            metric,
            h,
            phi,
            rgh,
        })
    }

    fn ginv(&self) -> &[f64] {
        self.metric.inv()
    }

    fn phi_up(&self) -> Vec<f64> {
        k::sharp(&self.phi, self.ginv(), self.n)
    }

    /// `v ↦ ⟨R^{g,H}_v, A⟩` for `A ∈ Λ¹⊗Λ²` (determinant norm on the pair).
    fn pair_with_rgh(&self, a: &[f64]) -> Vec<f64> {
        let n3 = k::pow(self.n, 3);
        (0..self.n).map(|v| 0.5 * contract_full(&self.rgh[v * n3..(v + 1) * n3], a, 3, self.ginv(), self.n)).collect()
    }

    /// `v ↦ ⟨H, v⌟W⟩` for a four-form `W`.
    fn h_against_four_form(&self, w: &[f64]) -> Vec<f64> {
        let n3 = k::pow(self.n, 3);
        (0..self.n).map(|v| contract_full(&w[v * n3..(v + 1) * n3], &self.h, 3, self.ginv(), self.n) / 6.0).collect()
    }

    /// `v ↦ ⟨β, v⌟H⟩` for a two-form `β`.
    fn two_form_against_h(&self, b: &[f64]) -> Vec<f64> {
        let nn = self.n * self.n;
        (0..self.n).map(|v| 0.5 * contract_full(&self.h[v * nn..(v + 1) * nn], b, 2, self.ginv(), self.n)).collect()
    }

    /// `(H∘H)(φ♯, ·)`.
    fn hh_phi(&self) -> Vec<f64> {
        k::interior(&self.phi_up(), &self.h_circ_h, 2, self.n)
    }

    /// Left and right sides of the `∇*(R∘R)` divergence lemma.
    pub fn lemma_div_rr(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let t1 = self.pair_with_rgh(&self.adjoint_rgh);
        let t2: Vec<f64> = self.grad_rgh_sq.iter().map(|x| -0.5 * x).collect();
        let t3: Vec<f64> = self.h_against_four_form(&self.rgh_wedge_rgh).iter().map(|x| -0.5 * x).collect();
        (self.div_rr.clone(), vec![t1, t2, t3])
    }

    /// Left and right sides of the `∇*(H∘H)` divergence lemma.
    pub fn lemma_div_hh(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let t1: Vec<f64> = self.grad_h_sq.iter().map(|x| -0.5 * x).collect();
        let t2: Vec<f64> = self.hh_phi().iter().map(|x| -x).collect();
        let t3: Vec<f64> = self.h_against_four_form(&self.rgh_wedge_rgh).iter().map(|x| -self.kappa * x).collect();
        let t4: Vec<f64> = self.two_form_against_h(&self.einstein_skew).iter().map(|x| 2.0 * x).collect();
        let t5 = self.h_against_four_form(&self.bianchi);
        (self.div_hh.clone(), vec![t1, t2, t3, t4, t5])
    }

    /// `∇*E^s + φ⌟E^s + ½ d Tr E^s`.
    pub fn einstein_divergence(&self) -> Vec<f64> {
        let pe = k::interior(&self.phi_up(), &self.einstein_sym, 2, self.n);
        (0..self.n).map(|v| self.div_es[v] + pe[v] + 0.5 * self.grad_trace_es[v]).collect()
    }

    /// Left and right sides of the divergence formula for `E^s`.
    pub fn divergence_formula(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let t1: Vec<f64> = self.pair_with_rgh(&self.strong).iter().map(|x| self.kappa * x).collect();
        let t2: Vec<f64> = self.grad_dilaton.iter().map(|x| 0.5 * x).collect();
        let t3: Vec<f64> = self.two_form_against_h(&self.einstein_skew).iter().map(|x| -x).collect();
        let t4: Vec<f64> = self.h_against_four_form(&self.bianchi).iter().map(|x| -0.5 * x).collect();
        (self.einstein_divergence(), vec![t1, t2, t3, t4])
    }

    /// Totally skew part `e^i ∧ S_{e_i}` of the strong tensor.
    pub fn strong_skew(&self) -> Vec<f64> {
        let n = self.n;
        let s = &self.strong;
        let mut out = vec![0.0; k::pow(n, 3)];
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[(b * n + c) * n + d] = s[(b * n + c) * n + d] + s[(c * n + d) * n + b] + s[(d * n + b) * n + c];
                }
            }
        }
        out
    }
}

/// `|lhs − Σ rhs| / max(1, |lhs|, |rhs_i|)` in the sup norm. The unit floor
/// keeps roundoff on identically vanishing terms from reading as order one.
pub fn identity_defect(lhs: &[f64], rhs: &[Vec<f64>]) -> f64 {
    let mut scale = max_abs(lhs).max(1.0);
    let mut diff = 0.0_f64;
    for (v, l) in lhs.iter().enumerate() {
        let r: f64 = rhs.iter().map(|t| t[v]).sum();
        diff = diff.max((l - r).abs());
    }
    for t in rhs {
        scale = scale.max(max_abs(t));
    }
    diff / scale
}

/// `E_E^s`, `E_E^a`, `E_D`, `E_B`, the strong condition and the divergence
/// combination that vanishes on strong solitons.
pub fn residual_general(c: &SolitonCandidate) -> Result<ResidualReport> {
    let e = Equations::evaluate(&c.sample, c.kappa)?;
    Ok(general_report(&e))
}

fn general_report(e: &Equations) -> ResidualReport {
    let mut r = ResidualReport::new();
    r.push("einstein_sym", max_abs(&e.einstein_sym), EXACT_TOL);
    r.push("einstein_skew", max_abs(&e.einstein_skew), EXACT_TOL);
    r.push("dilaton", e.dilaton.abs(), EXACT_TOL);
    r.push("bianchi", max_abs(&e.bianchi), EXACT_TOL);
    r.push("strong_full", max_abs(&e.strong), EXACT_TOL);
    r.push("strong_skew", max_abs(&e.strong_skew()), EXACT_TOL);
    r.push("trace_identity", max_abs(&e.einstein_divergence()), EXACT_TOL);
    r
}

/// The three divergence identities, as relative defects.
pub fn verify_divergence_identities(sample: &GeometrySample, kappa: f64) -> Result<ResidualReport> {
    let e = Equations::evaluate(sample, kappa)?;
    let tol = match sample.backend() {
        crate::sample::Backend::Chart => JET_IDENTITY_TOL,
        crate::sample::Backend::Invariant => 1e-10,
    };
    let mut r = ResidualReport::new();
    let (l, rhs) = e.lemma_div_rr();
    r.push("divergence_rr", identity_defect(&l, &rhs), tol);
    let (l, rhs) = e.lemma_div_hh();
    r.push("divergence_hh", identity_defect(&l, &rhs), tol);
    let (l, rhs) = e.divergence_formula();
    r.push("divergence_einstein", identity_defect(&l, &rhs), tol);
    Ok(r)
}

// ---- three dimensions ----

/// Pointwise pieces of the three-dimensional system for `H = f ν_g`.
#[derive(Debug, Clone)]
pub struct ThreeDimensional {
    pub einstein: SymBilinear,
    /// `f φ − df`.
    pub maxwell: Vec<f64>,
    /// `s − 3δφ − 2|φ|² + ½ f²`.
    pub dilaton: f64,
}

pub fn equations_3d(s: &GeometrySample, kappa: f64) -> Result<ThreeDimensional> {
    if s.dim() != 3 {
        return Err(Error::Unsupported("three-dimensional system".into()));
    }
    let f = s.f().ok_or_else(|| Error::Domain("candidate has no dilaton".into()))?;
    let df = s.df().expect("dilaton present");
    let g = s.metric();
    let ric = s.ricci();
    let rr = rgh_circ_closed_form(&g, &ric, f, &df)?;
    let nphi = k::sym2(&s.nabla_phi(), 3);
    let mut ein = vec![0.0; 9];
    for (i, e) in ein.iter_mut().enumerate() {
        *e = ric.comps()[i] + nphi[i] - 0.5 * f * f * g.comps()[i] + kappa * rr.comps()[i];
    }
    let phi = s.phi();
    let maxwell: Vec<f64> = (0..3).map(|a| f * phi[a] - df[a]).collect();
    let delta_phi = -k::trace(&s.nabla_phi(), g.inv(), 3);
    let phi_sq = g.inner(&g.raise(&phi), &g.raise(&phi));
    let dilaton = ric.trace(&g) - 3.0 * delta_phi - 2.0 * phi_sq + 0.5 * f * f;
    Ok(ThreeDimensional { einstein: SymBilinear::symmetrized(3, &ein), maxwell, dilaton })
}

pub fn residual_3d(c: &SolitonCandidate) -> Result<ResidualReport> {
    let t = equations_3d(&c.sample, c.kappa)?;
    let mut r = ResidualReport::new();
    r.push("einstein_sym", t.einstein.max_abs(), EXACT_TOL);
    r.push("einstein_skew", max_abs(&t.maxwell), EXACT_TOL);
    r.push("dilaton", t.dilaton.abs(), EXACT_TOL);
    Ok(r)
}

/// Case of the constant-dilaton classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstantDilatonCase {
    /// `κf² = 1`, spectrum `(−1/2κ, −1/2κ, 1/2κ)`.
    One,
    /// `κf² = 2`, spectrum `(0, 0, −1/κ)`.
    Two,
    /// `κf² = 3`, spectrum `(−1/2κ)³`.
    Three,
}

impl ConstantDilatonCase {
    pub fn index(self) -> u8 {
        match self {
            ConstantDilatonCase::One => 1,
            ConstantDilatonCase::Two => 2,
            ConstantDilatonCase::Three => 3,
        }
    }

    pub fn kappa_f2(self) -> f64 {
        self.index() as f64
    }

    /// Ascending principal Ricci curvatures.
    pub fn spectrum(self, kappa: f64) -> [f64; 3] {
        let h = 0.5 / kappa;
        match self {
            ConstantDilatonCase::One => [-h, -h, h],
            ConstantDilatonCase::Two => [-2.0 * h, 0.0, 0.0],
            ConstantDilatonCase::Three => [-h, -h, -h],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantDilatonClass {
    pub case: Option<ConstantDilatonCase>,
    /// Ascending principal Ricci curvatures.
    pub eigenvalues: [f64; 3],
    /// Positive dilaton forced by the case, `f = √(case/κ)`.
    pub f: Option<f64>,
    /// `s + ½f²` at the forced `f`.
    pub scalar_residual: f64,
    /// `2κ|Ric|² − 2f² + κf⁴/2` at the forced `f`.
    pub trace_identity: f64,
}

/// Match the Ricci spectrum against the three constant-dilaton cases.
pub fn classify_constant_dilaton(g: &Metric, ric: &SymBilinear, kappa: f64) -> Result<ConstantDilatonClass> {
    if g.dim() != 3 {
        return Err(Error::Unsupported("classification is three-dimensional".into()));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    let mut ev = ric.eigenvalues(g);
    ev.sort_by(|a, b| a.total_cmp(b));
    let eigenvalues = [ev[0], ev[1], ev[2]];
    let scale = 1.0 / kappa;
    let tol = SPECTRUM_TOL * scale + 1e-12;
    // the three target spectra are pairwise far apart, so at most one matches
    let case = [ConstantDilatonCase::Three, ConstantDilatonCase::One, ConstantDilatonCase::Two]
        .into_iter()
        .find(|c| c.spectrum(kappa).iter().zip(&eigenvalues).all(|(a, b)| (a - b).abs() <= tol));
    let (f, scalar_residual, trace_identity) = match case {
        Some(c) => {
            let f = (c.kappa_f2() / kappa).sqrt();
            let s = ric.trace(g);
            let ric_sq = ric.norm_sq(g);
            (Some(f), s + 0.5 * f * f, 2.0 * kappa * ric_sq - 2.0 * f * f + 0.5 * kappa * f.powi(4))
        }
        None => (None, f64::NAN, f64::NAN),
    };
    Ok(ConstantDilatonClass { case, eigenvalues, f, scalar_residual, trace_identity })
}

/// `−κ Ric∘Ric + (1 − κf²) Ric + ½(f² − κf⁴/2) g` together with `s + ½f²`.
pub fn residual_quadratic_form(g: &Metric, ric: &SymBilinear, f: f64, kappa: f64) -> (SymBilinear, f64) {
    let rr = ric_circ_ric(ric, g);
    let c0 = 0.5 * (f * f - 0.5 * kappa * f.powi(4));
    let n = g.dim();
    let q: Vec<f64> = (0..n * n).map(|i| -kappa * rr.comps()[i] + (1.0 - kappa * f * f) * ric.comps()[i] + c0 * g.comps()[i]).collect();
    (SymBilinear::symmetrized(n, &q), ric.trace(g) + 0.5 * f * f)
}

/// Discriminant of `−κμ² + (1 − κf²)μ + ½(f² − κf⁴/2)` in μ.
pub fn quadratic_discriminant(f: f64, kappa: f64) -> f64 {
    let a = -kappa;
    let b = 1.0 - kappa * f * f;
    let c = 0.5 * (f * f - 0.5 * kappa * f.powi(4));
    b * b - 4.0 * a * c
}

/// Both roots `((1 − κf²) ∓ 1)/(2κ)` of the principal-curvature quadratic.
pub fn quadratic_roots(f: f64, kappa: f64) -> [f64; 2] {
    [-0.5 * f * f, (2.0 - kappa * f * f) / (2.0 * kappa)]
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongResidual {
    /// `|∇^{g,H*}R^{g,H} + φ⌟R^{g,H}|∞`.
    pub full: f64,
    /// Totally skew projection.
    pub skew: f64,
    /// `|d^∇Ric(v) + (3f/2)∗Ric₀(v)|∞`; only for three dimensions with `df = 0`.
    pub reduced: Option<f64>,
}

pub fn strong_residual(c: &SolitonCandidate) -> Result<StrongResidual> {
    let e = Equations::evaluate(&c.sample, c.kappa)?;
    let reduced = match (c.sample.dim(), c.sample.f(), c.sample.df()) {
        (3, Some(f), Some(df)) if max_abs(&df) <= EXACT_TOL => Some(max_abs(&strong_reduced_3d(&c.sample, f)?)),
        _ => None,
    };
    Ok(StrongResidual { full: max_abs(&e.strong), skew: max_abs(&e.strong_skew()), reduced })
}

/// `T[v][a][b] = (∇_a Ric)(b, v) − (∇_b Ric)(a, v) + (3f/2)(∗Ric₀(v))_{ab}`.
pub fn strong_reduced_3d(s: &GeometrySample, f: f64) -> Result<Vec<f64>> {
    if s.dim() != 3 {
        return Err(Error::Unsupported("reduced strong condition is three-dimensional".into()));
    }
    let n = 3;
    let g = s.metric();
    let ric_j = k::ricci(&s.riemann_jet(), s.ginv_jet(), n);
    let nric = values(&s.cov_deriv(&ric_j, 2));
    let ric = values(&ric_j);
    let sc = k::trace(&ric, g.inv(), n);
    let mut out = vec![0.0; 27];
    for v in 0..n {
        let ric0_v: Vec<f64> = (0..n).map(|b| ric[v * n + b] - sc / 3.0 * g.at(v, b)).collect();
        let star = hodge_star(&AltTensor::one_form(&ric0_v), &g, 1.0)?;
        for a in 0..n {
            for b in 0..n {
                out[(v * n + a) * n + b] = nric[(a * n + b) * n + v] - nric[(b * n + a) * n + v] + 1.5 * f * star.comps()[a * n + b];
            }
        }
    }
    Ok(out)
}

/// `(∗(e^i ∧ S_{e_i}), Δf + φ(f))` for `H = f ν_g`; the first is minus the second
/// for every configuration.
pub fn strong_skew_scalar_3d(s: &GeometrySample, kappa: f64) -> Result<(f64, f64)> {
    if s.dim() != 3 {
        return Err(Error::Unsupported("scalar skew projection is three-dimensional".into()));
    }
    let df = s.df().ok_or_else(|| Error::Domain("candidate has no dilaton".into()))?;
    let e = Equations::evaluate(s, kappa)?;
    let g = s.metric();
    let star = e.strong_skew()[5] / g.det().sqrt();
    let lap = -k::trace(s.hess_f().expect("dilaton present").comps(), g.inv(), 3);
    let phi_f: f64 = g.raise(&s.phi()).iter().zip(&df).map(|(a, b)| a * b).sum();
    Ok((star, lap + phi_f))
}

// ---- constructors ----

/// Heisenberg metric `f²e¹⊗e¹ + e²⊗e² + e³⊗e³` with `f = 1/√κ`.
pub fn heisenberg_geometry(kappa: f64) -> Result<InvariantGeometry> {
    positive(kappa)?;
    let f = 1.0 / kappa.sqrt();
    let g = Metric::diagonal(&[f * f, 1.0, 1.0])?;
    InvariantGeometry::new(catalog("heisenberg", 0.0)?, g)?.with_dilaton(HEISENBERG_ORIENTATION * f)
}

/// Sign of the dilaton relative to the frame orientation `e₁∧e₂∧e₃`.
pub const HEISENBERG_ORIENTATION: f64 = 1.0;

/// `[e₃,e₁] = c e₁`, `[e₃,e₂] = c e₂` with `c = 1/(2√κ)`, `f = √(3/κ)`.
pub fn hyperbolic_geometry(kappa: f64) -> Result<InvariantGeometry> {
    positive(kappa)?;
    let c = 0.5 / kappa.sqrt();
    InvariantGeometry::new(catalog("hyperbolic", c)?, Metric::identity(3))?.with_dilaton((3.0 / kappa).sqrt())
}

pub fn heisenberg_strong_soliton(kappa: f64) -> Result<SolitonCandidate> {
    SolitonCandidate::from_invariant(heisenberg_geometry(kappa)?, kappa)
}

pub fn hyperbolic_soliton(kappa: f64) -> Result<SolitonCandidate> {
    SolitonCandidate::from_invariant(hyperbolic_geometry(kappa)?, kappa)
}

fn positive(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("κ must be positive, got {kappa}")))
    }
}

/// Unit eigenvectors of the Ricci endomorphism, ascending eigenvalues.
pub fn ricci_eigenbasis(g: &Metric, ric: &SymBilinear) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = g.dim();
    let gm = DMatrix::from_row_slice(n, n, g.comps());
    let l = gm.cholesky().expect("metric is SPD").l();
    let li = l.clone().try_inverse().expect("triangular factor is invertible");
    let m = &li * DMatrix::from_row_slice(n, n, ric.comps()) * li.transpose();
    let eig = SymmetricEigen::new(0.5 * (&m + m.transpose()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lit = li.transpose();
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| {
            let v = &lit * eig.eigenvectors.column(i);
            v.iter().copied().collect()
        })
        .collect();
    (vals, vecs)
}

/// Checks around the unit Ricci eigenvector ξ of a case-one geometry.
#[derive(Debug, Clone, Serialize)]
pub struct CaseOneStructure {
    pub xi: Vec<f64>,
    /// `|∇ξ + ½ f ∗ξ|∞`.
    pub killing_defect: f64,
    /// `|dξ + f ∗ξ|∞`.
    pub dxi_defect: f64,
    /// Curvature of `∇̄_v = ∇_v − ½f ∗v + f g(v,ξ) ∗ξ`.
    pub auxiliary_curvature: f64,
    /// `|∇̄ξ|∞`.
    pub auxiliary_xi: f64,
}

pub fn case_one_structure(geom: &InvariantGeometry) -> Result<CaseOneStructure> {
    let f = geom.f.ok_or_else(|| Error::Domain("geometry has no dilaton".into()))?;
    let n = 3;
    let g = &geom.metric;
    let gamma = geom.christoffel();
    let (_, ric, _) = geom.curvature();
    let (_, vecs) = ricci_eigenbasis(g, &ric);
    let xi = vecs[2].clone();
    let xi_low = g.lower(&xi);
    let nu = g.volume_form();
    let nu = nu.comps();
    // (∇_a ξ)_b
    let mut nxi = [0.0; 9];
    for a in 0..n {
        for b in 0..n {
            nxi[a * n + b] = (0..n).map(|kk| g.at(b, kk) * (0..n).map(|m| gamma[(a * n + m) * n + kk] * xi[m]).sum::<f64>()).sum();
        }
    }
    let star_xi: Vec<f64> = (0..9).map(|ab| (0..n).map(|c| xi[c] * nu[c * 9 + ab]).sum()).collect();
    let killing: Vec<f64> = (0..9).map(|i| nxi[i] + 0.5 * f * star_xi[i]).collect();
    let dxi: Vec<f64> = (0..9).map(|i| nxi[i] - nxi[(i % 3) * 3 + i / 3] + f * star_xi[i]).collect();

    let gi = g.inv();
    let mut bar = gamma.clone();
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                let mut x = 0.0;
                for y in 0..n {
                    x += gi[kk * n + y] * (-0.5 * f * nu[(i * n + j) * n + y] + f * xi_low[i] * star_xi[j * n + y]);
                }
                bar[(i * n + j) * n + kk] += x;
            }
        }
    }
    let rbar = invariant_connection_curvature(&geom.algebra, &bar, g);
    let bar_xi: Vec<f64> = (0..9).map(|ak| (0..n).map(|m| bar[(ak / 3 * n + m) * n + ak % 3] * xi[m]).sum()).collect();
    Ok(CaseOneStructure {
        xi,
        killing_defect: max_abs(&killing),
        dxi_defect: max_abs(&dxi),
        auxiliary_curvature: max_abs(&rbar),
        auxiliary_xi: max_abs(&bar_xi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_is_one() {
        for (f, kappa) in [(1.0, 1.0), (0.3, 2.7), (2.0, 0.5)] {
            assert!((quadratic_discriminant(f, kappa) - 1.0).abs() < 1e-12);
        }
    }
}
