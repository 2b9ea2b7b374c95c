//! `hetflow`: homothety trajectories, regime sweeps, 3D flows, soliton checks
//! and verification suites.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical-domain error,
//! 3 verification failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::{Failure, Outcome};
use config::RunConfig;
use hetflow_core::par::Execution;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hetflow", version, about = "Numerics for the heterotic Ricci flow")]
struct Cli {
    /// JSON file with defaults for any flag; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Integrate the homothety ODE for σ(t).
    Homothety(HomothetyArgs),
    /// Classify a (κ, μ) grid.
    Sweep(SweepArgs),
    /// Integrate the three-dimensional flow of (g, f) on a Lie group.
    Flow(FlowArgs),
    /// Residuals of the soliton system for left-invariant data.
    SolitonCheck(SolitonArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct HomothetyArgs {
    /// positive, flat, negative or su2.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Overrides the case's normalized scalar curvature.
    #[arg(long, allow_hyphen_values = true)]
    scalar: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    /// printed or flow-reduced.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    #[arg(long)]
    kappa_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    mu_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: Option<f64>,
    #[arg(long)]
    mu_n: Option<usize>,
    /// Also integrate every cell and report the integrated tag.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args, Debug)]
struct FlowArgs {
    /// Catalog name: r3, heisenberg, su2, sl2r, e11, e2, hyperbolic.
    #[arg(long)]
    algebra: Option<String>,
    /// κ for su2, c for hyperbolic.
    #[arg(long)]
    param: Option<f64>,
    /// 3 (diagonal), 6 (upper triangle) or 9 comma-separated entries.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    metric: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    /// half or quarter.
    #[arg(long)]
    hh: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
}

#[derive(Args, Debug)]
struct SolitonArgs {
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    metric: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// A suite name or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Verb {
    fn flags(&self) -> RunConfig {
        let base = RunConfig::default();
        match self {
            Verb::Homothety(a) => RunConfig {
                case: a.case.clone(),
                kappa: a.kappa,
                mu: a.mu,
                scalar: a.scalar,
                sigma0: a.sigma0,
                t_start: a.t_start,
                t_end: a.t_end,
                stride: a.stride,
                model: a.model.clone(),
                rtol: a.rtol,
                ..base
            },
            Verb::Sweep(a) => RunConfig {
                case: a.case.clone(),
                kappa_min: a.kappa_min,
                kappa_max: a.kappa_max,
                kappa_n: a.kappa_n,
                mu_min: a.mu_min,
                mu_max: a.mu_max,
                mu_n: a.mu_n,
                cross_check: a.cross_check.then_some(true),
                ..base
            },
            Verb::Flow(a) => RunConfig {
                algebra: a.algebra.clone(),
                param: a.param,
                metric: a.metric.clone(),
                f: a.f,
                kappa: a.kappa,
                t_end: a.t_end,
                stride: a.stride,
                hh: a.hh.clone(),
                rtol: a.rtol,
                ..base
            },
            Verb::SolitonCheck(a) => {
                RunConfig { algebra: a.algebra.clone(), param: a.param, metric: a.metric.clone(), f: a.f, kappa: a.kappa, ..base }
            }
            Verb::Verify(a) => RunConfig { suite: a.suite.clone(), trials: a.trials, seed: a.seed, ..base },
        }
    }
}

/// `HETFLOW_THREADS`, when set, must be a positive integer.
fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("HETFLOW_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!("HETFLOW_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

fn dispatch(verb: &Verb, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let exec = Execution::default();
    match verb {
        Verb::Homothety(_) => commands::homothety(cfg),
        Verb::Sweep(_) => commands::sweep_cmd(cfg, exec),
        Verb::Flow(_) => commands::flow(cfg),
        Verb::SolitonCheck(_) => commands::soliton_check(cfg),
        Verb::Verify(_) => commands::verify(cfg, exec),
    }
}

#[cfg(feature = "parallel")]
fn run_capped(threads: Option<usize>, job: impl FnOnce() -> Result<Outcome, Failure> + Send) -> Result<Outcome, Failure> {
    match threads {
        None => job(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Config(format!("cannot start {n} threads: {e}")))?;
            pool.install(job)
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_capped(_threads: Option<usize>, job: impl FnOnce() -> Result<Outcome, Failure>) -> Result<Outcome, Failure> {
    job()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = file.overlay(cli.verb.flags());
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.validate()?;
    let threads = thread_cap()?;

    let outcome = run_capped(threads, || dispatch(&cli.verb, &cfg))?;
    output::emit(&outcome.text, cfg.out.as_deref()).map_err(|e| Failure::Config(format!("cannot write output: {e}")))?;
    if outcome.pass {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Config(m) => format!("configuration error: {m}"),
                Failure::Numerical(m) => format!("numerical error: {m}"),
                Failure::Verification(m) => m.clone(),
            };
            eprintln!("hetflow: {msg}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
