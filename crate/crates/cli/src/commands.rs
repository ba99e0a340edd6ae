//! Subcommand drivers. Each takes parsed arguments and a writer for the
//! report, so tests can run them without spawning the binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotbec::manifold::normalize;
use rotbec::optim::{initial_guess, run_problem, RunOptions, RunResult, Termination};
use rotbec::spectral::{
    condition_sweep, eigs_component_a, eigs_horizontal_pencil, eigs_projected_hessian, predicted_rate,
    EigOptions, Which,
};
use rotbec::{GpeProblem, PFrame, C64};

use crate::config::{parse_method, parse_step};
use crate::export::{self, DensityFormat};
use crate::fmt::{sig8, sig8_list};
use crate::{io_err, preset, CliError, ConfigFile, Result, StateFile};

/// Exit status of a solve that stopped without meeting the tolerance.
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rotbec", version, about = "Ground states of rotating multicomponent condensates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the energy and write history, state and densities.
    Solve(SolveArgs),
    /// Smallest eigenvalues of each component operator and projected Hessian.
    Spectrum(SpectrumArgs),
    /// Extreme horizontal-pencil eigenvalues and the predicted local rate.
    Rate(RateArgs),
    /// Condition numbers of the Lagrangian metric blocks over a sweep of ω.
    Condition(ConditionArgs),
    /// Print a built-in configuration as TOML.
    Preset(PresetArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: model1, model2 or model3.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override the number of elements per direction.
    #[arg(long)]
    pub mesh: Option<usize>,
}

impl ModelArgs {
    pub fn load(&self) -> Result<ConfigFile> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => ConfigFile::load(path)?,
            (None, Some(name)) => preset::preset(name)?,
            _ => return Err(CliError::Usage("exactly one of --config and --preset is required".into())),
        };
        if let Some(m) = self.mesh {
            cfg.model.elements_per_dir = m;
            cfg.model.validate()?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// earg or lagr.
    #[arg(long)]
    pub method: Option<String>,
    /// Regularization of the Lagrangian metric, in (0, 1).
    #[arg(long)]
    pub omega: Option<f64>,
    /// fixed:F, ls or adaptive.
    #[arg(long)]
    pub step: Option<String>,
    /// Stop once the residual falls below this (configuration default 1e-14).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative inner-solve tolerance factor.
    #[arg(long = "tol-cg")]
    pub tol_cg: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Perturb the initial guess randomly with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    pub fn apply(&self, run: &mut RunOptions) -> Result<()> {
        if let Some(name) = &self.method {
            run.method = parse_method(name, self.omega)?;
        } else if let Some(w) = self.omega {
            run.method = parse_method("lagr", Some(w))?;
        }
        if let Some(s) = &self.step {
            run.step = parse_step(s)?;
        }
        if let Some(t) = self.tol {
            run.stop_residual = t;
        }
        if let Some(t) = self.tol_cg {
            run.tol_cg = t;
        }
        if let Some(k) = self.max_iters {
            run.max_iters = k;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory for config.toml, history.csv, state.gperot, density.vtk and density.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// State written by `solve`.
    #[arg(long)]
    pub state: PathBuf,
    /// Relative accuracy of the eigenvalues.
    #[arg(long = "eig-tol", default_value_t = 1e-10)]
    pub eig_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: StateArgs,
    /// Eigenvalues per operator.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: StateArgs,
    /// earg or lagr.
    #[arg(long, default_value = "earg")]
    pub method: String,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Step sizes to evaluate; repeatable.
    #[arg(long, default_values_t = [1.0])]
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ConditionArgs {
    #[command(flatten)]
    pub common: StateArgs,
    /// Comma-separated values of ω in [0, 1).
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 0.9, 0.95, 0.99])]
    pub omegas: Vec<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    /// model1, model2 or model3.
    pub name: String,
    /// Write the TOML here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Dispatches a parsed command line; returns the process exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => solve(a, out).map(|r| exit_status(&r)),
        Command::Spectrum(a) => spectrum(a, out).map(|_| 0),
        Command::Rate(a) => rate(a, out).map(|_| 0),
        Command::Condition(a) => condition(a, out).map(|_| 0),
        Command::Preset(a) => preset_cmd(a, out).map(|_| 0),
    }
}

pub fn exit_status(r: &RunResult) -> i32 {
    match r.termination {
        Termination::Converged => 0,
        _ => EXIT_NOT_CONVERGED,
    }
}

fn report(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text).and_then(|_| out.write_all(b"\n")).map_err(io_err(Path::new("<stdout>")))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { report($out, format_args!($($arg)*)) };
}

/// Constant guess, optionally with a seeded relative perturbation of 1%.
fn starting_point(problem: &GpeProblem, seed: Option<u64>) -> Result<PFrame> {
    let phi = initial_guess(problem);
    let Some(seed) = seed else { return Ok(phi) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = phi.clone();
    for z in v.as_mut_slice() {
        *z *= C64::new(1.0 + 0.01 * rng.random_range(-1.0..1.0), 0.01 * rng.random_range(-1.0..1.0));
    }
    Ok(normalize(problem, &v)?)
}

/// Runs the configured method and writes all artifacts, also when the run
/// stops without converging.
pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<RunResult> {
    let mut cfg = args.model.load()?;
    args.run.apply(&mut cfg.run)?;
    let problem = GpeProblem::new(&cfg.model)?;
    let phi0 = starting_point(&problem, args.run.seed)?;
    let res = run_problem(&problem, phi0, &cfg.run, None)?;

    let dir = &args.out;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    cfg.save(&dir.join("config.toml"))?;
    export::write_text(&dir.join("history.csv"), &export::history_csv(&res.history))?;
    StateFile::from_frame(problem.disc(), &res.phi).write(&dir.join("state.gperot"))?;
    export::write_density(&dir.join("density.vtk"), problem.disc(), &res.phi, DensityFormat::Vtk)?;
    export::write_density(&dir.join("density.csv"), problem.disc(), &res.phi, DensityFormat::Csv)?;

    say!(out, "status {}", res.termination.as_str())?;
    say!(out, "iterations {} (warm start {})", res.iterations, res.warm_start_iterations)?;
    say!(out, "energy {}", sig8(res.energy))?;
    say!(out, "lambda {}", sig8_list(&res.lambda))?;
    say!(out, "residual {}", sig8(res.residual))?;
    if res.fallbacks > 0 {
        say!(out, "fallbacks {}", res.fallbacks)?;
    }
    if res.termination != Termination::Converged {
        say!(
            out,
            "not converged: {} with residual {} above tolerance {}",
            res.termination.as_str(),
            sig8(res.residual),
            sig8(cfg.run.stop_residual)
        )?;
    }
    Ok(res)
}

/// Problem and stored state for the post-processing commands.
pub fn load_state(args: &StateArgs) -> Result<(GpeProblem, PFrame)> {
    let cfg = args.model.load()?;
    let problem = GpeProblem::new(&cfg.model)?;
    let phi = StateFile::read(&args.state)?.to_frame(problem.disc(), problem.p())?;
    Ok((problem, phi))
}

fn eig_options(args: &StateArgs) -> EigOptions {
    EigOptions { tol: args.eig_tol, ..EigOptions::default() }
}

pub struct SpectrumReport {
    pub component_a: Vec<Vec<f64>>,
    pub projected_hessian: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

pub fn spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<SpectrumReport> {
    let (problem, phi) = load_state(&args.common)?;
    let st = problem.linearize(&phi)?;
    let opts = eig_options(&args.common);
    let mut rep =
        SpectrumReport { component_a: Vec::new(), projected_hessian: Vec::new(), lambda: st.lambda.to_vec() };
    for j in 0..problem.p() {
        rep.component_a.push(eigs_component_a(&st, j, args.k, &opts)?.eigenvalues);
        rep.projected_hessian.push(eigs_projected_hessian(&st, j, args.k, &opts)?.eigenvalues);
    }
    say!(out, "lambda {}", sig8_list(&rep.lambda))?;
    for j in 0..problem.p() {
        say!(out, "A_{} {}", j + 1, sig8_list(&rep.component_a[j]))?;
    }
    for j in 0..problem.p() {
        say!(out, "F_{} {}", j + 1, sig8_list(&rep.projected_hessian[j]))?;
    }
    Ok(rep)
}

pub struct RateReport {
    pub eta_inf: f64,
    pub eta_sup: f64,
    /// `(τ, ρ(τ))` for every requested step.
    pub rho: Vec<(f64, f64)>,
}

pub fn rate(args: &RateArgs, out: &mut dyn Write) -> Result<RateReport> {
    let (problem, phi) = load_state(&args.common)?;
    let st = problem.linearize(&phi)?;
    let sel = parse_method(&args.method, args.omega)?.metric();
    let eig = eigs_horizontal_pencil(&st, sel, Which::Both, 1, &eig_options(&args.common))?;
    let eta_inf = eig.eigenvalues[0];
    let eta_sup = *eig.eigenvalues.last().expect("two eigenvalues");
    say!(out, "eta_inf {}", sig8(eta_inf))?;
    say!(out, "eta_sup {}", sig8(eta_sup))?;
    say!(out, "tau_max {}", sig8(2.0 / eta_sup))?;
    let mut rho = Vec::new();
    for &tau in &args.tau {
        let p = predicted_rate(tau, eta_inf, eta_sup)?;
        let note = if p.admissible() { "" } else { " (not contractive)" };
        say!(out, "tau {} rho {}{note}", sig8(tau), sig8(p.rho))?;
        rho.push((tau, p.rho));
    }
    Ok(RateReport { eta_inf, eta_sup, rho })
}

pub fn condition_csv(entries: &[rotbec::spectral::ConditionEntry]) -> String {
    let p = entries.first().map_or(0, |e| e.kappa.len());
    let mut s = String::from("omega");
    for j in 1..=p {
        s.push_str(&format!(",kappa_{j}"));
    }
    s.push('\n');
    for e in entries {
        s.push_str(&sig8(e.omega));
        for k in &e.kappa {
            s.push(',');
            s.push_str(&k.map_or_else(|| "indefinite".to_string(), sig8));
        }
        s.push('\n');
    }
    s
}

pub fn condition(args: &ConditionArgs, out: &mut dyn Write) -> Result<Vec<rotbec::spectral::ConditionEntry>> {
    let (problem, phi) = load_state(&args.common)?;
    let st = problem.linearize(&phi)?;
    let entries = condition_sweep(&st, &args.omegas, &eig_options(&args.common))?;
    let csv = condition_csv(&entries);
    match &args.out {
        Some(path) => export::write_text(path, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(entries)
}

pub fn preset_cmd(args: &PresetArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = preset::preset(&args.name)?;
    match &args.out {
        Some(path) => cfg.save(path),
        None => out.write_all(cfg.emit().as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}
