//! The five verbs. Each turns a merged [`RunConfig`] into output text.

use crate::config::{cfg_err, ConfigError, RunConfig};
use crate::output::{json, num, opt, Csv};
use hetflow_core::flow::{integrate_flow, rhs_3d, FlowEventKind, FlowParams, FlowState3, HhConvention};
use hetflow_core::homogeneous::{catalog, InvariantGeometry};
use hetflow_core::homothety::{
    flat_closed_form, integrate, linspace, su2_closed_form, su2_problem, sweep, EventKind, HomothetyCase, HomothetyModel, HomothetyProblem,
    IntegrationOptions,
};
use hetflow_core::par::Execution;
use hetflow_core::soliton::{
    classify_constant_dilaton, heisenberg_geometry, hyperbolic_geometry, residual_3d, residual_general, strong_residual,
    ConstantDilatonClass, ResidualReport, SolitonCandidate, StrongResidual,
};
use hetflow_core::tensor::Metric;
use hetflow_core::verify::{run_suite, SuiteConfig, SuiteReport, SUITES};
use serde::Serialize;

pub const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    /// The report was produced but did not pass.
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<hetflow_core::Error> for Failure {
    fn from(e: hetflow_core::Error) -> Self {
        match e {
            hetflow_core::Error::UnknownAlgebra(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Output text plus whether the verb's own check passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, pass: true }
    }
}

fn model(cfg: &RunConfig) -> Result<HomothetyModel, ConfigError> {
    match cfg.model.as_deref().unwrap_or("printed") {
        "printed" => Ok(HomothetyModel::Printed),
        "flow-reduced" => Ok(HomothetyModel::FlowReduced),
        other => Err(cfg_err(format!("unknown model `{other}`"))),
    }
}

fn case(name: &str) -> Result<HomothetyCase, ConfigError> {
    name.parse().map_err(|_| cfg_err(format!("unknown case `{name}`")))
}

fn event_name(kind: EventKind) -> &'static str {
    match kind {
        EventKind::Collapse => "collapse",
        EventKind::Divergence => "divergence",
        EventKind::Stall => "stall",
        EventKind::Horizon => "",
    }
}

/// Indices `0, stride, 2·stride, …` plus the last one.
fn strided(len: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).step_by(stride.max(1)).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

pub fn homothety(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let case_name = cfg.case.clone().unwrap_or_else(|| "positive".into());
    let kappa = cfg.kappa.unwrap_or(0.1);
    let mu = cfg.mu.unwrap_or(1.0);
    let sigma0 = cfg.sigma0.unwrap_or(1.0);
    let span = (cfg.t_start.unwrap_or(0.0), cfg.t_end.unwrap_or(10.0));
    if !(span.0 <= 0.0 && span.1 >= 0.0) {
        return Err(Failure::Config("need --t-start ≤ 0 ≤ --t-end".into()));
    }
    let model = model(cfg)?;

    let su2 = case_name == "su2";
    let problem = if su2 {
        su2_problem(kappa)?.with_model(model)
    } else {
        let c = case(&case_name)?;
        let s = cfg.scalar.unwrap_or(c.scalar());
        HomothetyProblem::new(kappa, mu, s, sigma0)?.with_model(model)
    };
    // The flat closed form starts at σ = 1 and has no curvature term.
    let flat_closed = !su2 && cfg.scalar.unwrap_or(case(&case_name)?.scalar()) == 0.0 && sigma0 == 1.0;
    let closed = |t: f64| -> Option<f64> {
        if su2 {
            su2_closed_form(kappa, t).ok()
        } else if flat_closed {
            flat_closed_form(kappa, mu, t).ok()
        } else {
            None
        }
    };
    let has_closed = su2 || flat_closed;

    let mut opts = IntegrationOptions::default();
    if let Some(r) = cfg.rtol {
        opts.rtol = r;
        opts.atol = cfg.atol.unwrap_or(r * 1e-2);
    }
    let traj = integrate(&problem, span, &opts)?;

    let mut header = vec!["t", "sigma", "f"];
    if has_closed {
        header.push("sigma_closed");
    }
    header.push("event");
    let mut csv = Csv::new(&header);
    let idx = strided(traj.samples.len(), cfg.stride.unwrap_or(1));
    let last = traj.samples.len().saturating_sub(1);
    for &i in &idx {
        let (t, sigma) = traj.samples[i];
        let mut row = vec![num(t), num(sigma), num(problem.dilaton(sigma))];
        if has_closed {
            row.push(opt(closed(t)));
        }
        let ev = match (i, traj.past, traj.future) {
            (i, _, Some(e)) if i == last => event_name(e.kind),
            (0, Some(e), _) => event_name(e.kind),
            _ => "",
        };
        row.push(ev.to_string());
        csv.row(&row);
    }
    Ok(Outcome::ok(csv.into_string()))
}

pub fn sweep_cmd(cfg: &RunConfig, exec: Execution) -> Result<Outcome, Failure> {
    let c = case(cfg.case.as_deref().unwrap_or("positive"))?;
    let kappas = linspace(cfg.kappa_min.unwrap_or(0.0), cfg.kappa_max.unwrap_or(1.0), cfg.kappa_n.unwrap_or(41));
    let mus = linspace(cfg.mu_min.unwrap_or(0.0), cfg.mu_max.unwrap_or(2.0), cfg.mu_n.unwrap_or(41));
    let cross = cfg.cross_check.unwrap_or(false);
    let mut cells = sweep(c, &kappas, &mus, cross, exec)?;
    cells.sort_by_key(|c| (c.i, c.j));

    let mut header = vec!["i", "j", "kappa", "mu", "tag", "past_limit", "future_limit", "collapse_time"];
    if cross {
        header.push("integrated_tag");
    }
    let mut csv = Csv::new(&header);
    for cell in &cells {
        let b = &cell.behavior;
        let mut row = vec![
            cell.i.to_string(),
            cell.j.to_string(),
            num(cell.kappa),
            num(cell.mu),
            b.tag.name().to_string(),
            opt(b.past_limit),
            opt(b.future_limit),
            opt(b.collapse_time),
        ];
        if cross {
            row.push(cell.integrated.map_or(String::new(), |t| t.name().to_string()));
        }
        csv.row(&row);
    }
    Ok(Outcome::ok(csv.into_string()))
}

/// Accepts 9 components, 6 upper-triangular ones, or a 3-entry diagonal.
fn metric(values: Option<&[f64]>) -> Result<Metric, Failure> {
    let Some(v) = values else { return Ok(Metric::identity(3)) };
    let comps = match v.len() {
        9 => v.to_vec(),
        6 => vec![v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]],
        3 => vec![v[0], 0.0, 0.0, 0.0, v[1], 0.0, 0.0, 0.0, v[2]],
        n => return Err(Failure::Config(format!("--metric takes 3, 6 or 9 values, got {n}"))),
    };
    Ok(Metric::new(3, comps)?)
}

fn algebra_param(cfg: &RunConfig, name: &str, kappa: f64) -> f64 {
    cfg.param.unwrap_or(if name == "su2" { kappa } else { 1.0 })
}

pub fn flow(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let name = cfg.algebra.clone().ok_or_else(|| Failure::Config("flow needs --algebra".into()))?;
    let kappa = cfg.kappa.unwrap_or(1.0);
    let alg = catalog(&name, algebra_param(cfg, &name, kappa))?;
    let hh = match cfg.hh.as_deref().unwrap_or("half") {
        "half" => HhConvention::Half,
        "quarter" => HhConvention::Quarter,
        other => return Err(Failure::Config(format!("unknown --hh `{other}`"))),
    };
    let state = FlowState3::new(alg, metric(cfg.metric.as_deref())?, cfg.f.unwrap_or(0.0))?;
    let mut params = FlowParams { hh, stride: cfg.stride.unwrap_or(1), ..FlowParams::new(kappa, cfg.t_end.unwrap_or(1.0))? };
    if let Some(r) = cfg.rtol {
        params.rtol = r;
        params.atol = cfg.atol.unwrap_or(r * 1e-2);
    }
    let traj = integrate_flow(&state, &params)?;

    let mut csv = Csv::new(&["t", "g00", "g01", "g02", "g11", "g12", "g22", "f", "volume_scale", "event"]);
    let last = traj.samples.len() - 1;
    for (k, s) in traj.samples.iter().enumerate() {
        let mut row = vec![num(s.t)];
        row.extend([0, 1, 2, 4, 5, 8].iter().map(|&i| num(s.g[i])));
        row.push(num(s.f));
        row.push(num(s.volume_scale));
        let ev = match &traj.event {
            Some(e) if k == last => match e.kind {
                FlowEventKind::Collapse => "collapse",
                FlowEventKind::Divergence => "divergence",
                FlowEventKind::Singular => "singular",
            },
            _ => "",
        };
        row.push(ev.to_string());
        csv.row(&row);
    }
    Ok(Outcome::ok(csv.into_string()))
}

#[derive(Serialize)]
struct SolitonReport {
    schema_version: u32,
    algebra: String,
    kappa: f64,
    f: f64,
    general: ResidualReport,
    three_dimensional: ResidualReport,
    strong: StrongResidual,
    /// `|ġ|, |ḟ|` of the flow at the candidate; zero at a soliton with no drift.
    flow_rate: f64,
    classification: ConstantDilatonClass,
    pass: bool,
}

pub fn soliton_check(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let name = cfg.algebra.clone().ok_or_else(|| Failure::Config("soliton-check needs --algebra".into()))?;
    let kappa = cfg.kappa.unwrap_or(1.0);
    let mut geom = match (name.as_str(), &cfg.metric, cfg.param) {
        ("heisenberg", None, None) => heisenberg_geometry(kappa)?,
        ("hyperbolic", None, None) => hyperbolic_geometry(kappa)?,
        _ => {
            let alg = catalog(&name, algebra_param(cfg, &name, kappa))?;
            let f = cfg.f.ok_or_else(|| Failure::Config(format!("--f is required for `{name}` with explicit data")))?;
            InvariantGeometry::new(alg, metric(cfg.metric.as_deref())?)?.with_dilaton(f)?
        }
    };
    if let Some(f) = cfg.f {
        geom = geom.with_dilaton(f)?;
    }
    let f = geom.f.expect("dilaton set above");
    let (gd, fd) = rhs_3d(&FlowState3::from_geometry(&geom)?, kappa)?;
    let metric = geom.metric.clone();
    let c = SolitonCandidate::from_invariant(geom, kappa)?;
    let general = residual_general(&c)?;
    let three = residual_3d(&c)?;
    let strong = strong_residual(&c)?;
    let classification = classify_constant_dilaton(&metric, &c.sample.ricci(), kappa)?;
    let pass = general.passed() && three.passed();
    let report = SolitonReport {
        schema_version: JSON_SCHEMA_VERSION,
        algebra: name,
        kappa,
        f,
        general,
        three_dimensional: three,
        strong,
        flow_rate: gd.max_abs().max(fd.abs()),
        classification,
        pass,
    };
    Ok(Outcome { text: json(&report), pass })
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    seed: u64,
    trials: usize,
    suites: Vec<SuiteReport>,
    pass: bool,
}

pub fn verify(cfg: &RunConfig, exec: Execution) -> Result<Outcome, Failure> {
    let which = cfg.suite.clone().unwrap_or_else(|| "all".into());
    let names: Vec<&str> = if which == "all" {
        SUITES.to_vec()
    } else if let Some(&n) = SUITES.iter().find(|&&n| n == which) {
        vec![n]
    } else {
        return Err(Failure::Config(format!("unknown suite `{which}`; expected one of {} or all", SUITES.join(", "))));
    };
    let sc = SuiteConfig { seed: cfg.seed.unwrap_or(0), trials: cfg.trials.unwrap_or(100), exec };
    let suites = names.iter().map(|n| run_suite(n, &sc)).collect::<Result<Vec<_>, _>>()?;
    let pass = suites.iter().all(|s| s.pass);
    let report = VerifyReport { schema_version: JSON_SCHEMA_VERSION, seed: sc.seed, trials: sc.trials, suites, pass };
    Ok(Outcome { text: json(&report), pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_keeps_endpoints() {
        assert_eq!(strided(5, 2), vec![0, 2, 4]);
        assert_eq!(strided(6, 4), vec![0, 4, 5]);
        assert_eq!(strided(1, 3), vec![0]);
        assert!(strided(0, 3).is_empty());
    }

    #[test]
    fn metric_shapes() {
        assert_eq!(metric(Some(&[1.0, 2.0, 3.0])).unwrap().comps()[8], 3.0);
        assert!(matches!(metric(Some(&[1.0, 2.0])), Err(Failure::Config(_))));
        assert!(matches!(metric(Some(&[1.0, 0.0, 0.0, -1.0, 0.0, 1.0])), Err(Failure::Numerical(_))));
    }
}
