//! TOML configuration: a model description plus run options.
//!
//! ```toml
//! [domain]
//! x = [-10.0, 10.0]
//! y = [-10.0, 10.0]
//!
//! [mesh]
//! elements_per_dir = 64
//! quad_order = 4
//!
//! [interaction]
//! kappa = [[120.0, 20.0], [20.0, 100.0]]
//!
//! [[component]]
//! mass = 2.0
//! omega = -1.0
//! margin = 0.05
//! potential = { a = 0.48, b = 1.08 }
//!
//! [run]
//! method = "earg"          # or "lagr" with `omega`
//! step = "fixed:1.0"       # "ls", "ls:tmin:tmax:grid:rtol", "adaptive", "adaptive:tau0"
//! tol = 1e-14
//! tol_cg = 1e-8
//! warm_start = 1e-2        # omit to start the main method immediately
//! ```

use std::path::Path;

use rotbec::optim::{FallbackPolicy, Method, RunOptions, StepRule};
use rotbec::{ModelSpec, Potential, Rect};
use serde::{Deserialize, Serialize};

use crate::{io_err, CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub model: ModelSpec,
    pub run: RunOptions,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        raw.into_config()
    }

    pub fn emit(&self) -> String {
        toml::to_string(&RawConfig::from_config(self)).expect("configuration serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.emit()).map_err(io_err(path))
    }
}

pub fn parse_method(name: &str, omega: Option<f64>) -> Result<Method> {
    match name {
        "earg" => Ok(Method::EaRgd),
        "lagr" => {
            omega.map(Method::LagrRgd).ok_or_else(|| CliError::Parse("method \"lagr\" needs omega".into()))
        }
        other => Err(CliError::Parse(format!("unknown method {other:?}; expected earg or lagr"))),
    }
}

pub fn parse_step(text: &str) -> Result<StepRule> {
    let bad = || CliError::Parse(format!("invalid step {text:?}; expected fixed:F, ls or adaptive"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let mut parts = text.split(':');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match (head, rest.as_slice()) {
        ("fixed", [t]) => Ok(StepRule::Fixed(num(t)?)),
        ("ls", []) => Ok(StepRule::line_search()),
        ("ls", [lo, hi, grid, tol]) => Ok(StepRule::ExactLineSearch {
            tau_min: num(lo)?,
            tau_max: num(hi)?,
            grid: grid.trim().parse().map_err(|_| bad())?,
            rel_tol: num(tol)?,
        }),
        ("adaptive", []) => Ok(StepRule::adaptive()),
        ("adaptive", [t]) => Ok(StepRule::Adaptive { tau0: num(t)? }),
        _ => Err(bad()),
    }
}

pub fn format_step(step: &StepRule) -> String {
    match *step {
        StepRule::Fixed(t) => format!("fixed:{t:?}"),
        s if s == StepRule::line_search() => "ls".into(),
        StepRule::ExactLineSearch { tau_min, tau_max, grid, rel_tol } => {
            format!("ls:{tau_min:?}:{tau_max:?}:{grid}:{rel_tol:?}")
        }
        s if s == StepRule::adaptive() => "adaptive".into(),
        StepRule::Adaptive { tau0 } => format!("adaptive:{tau0:?}"),
    }
}

fn parse_fallback(name: &str) -> Result<FallbackPolicy> {
    match name {
        "energy-adaptive-step" => Ok(FallbackPolicy::EnergyAdaptiveStep),
        "halve-omega" => Ok(FallbackPolicy::HalveOmega),
        "stop" => Ok(FallbackPolicy::Stop),
        other => Err(CliError::Parse(format!(
            "unknown fallback {other:?}; expected energy-adaptive-step, halve-omega or stop"
        ))),
    }
}

fn format_fallback(f: FallbackPolicy) -> &'static str {
    match f {
        FallbackPolicy::EnergyAdaptiveStep => "energy-adaptive-step",
        FallbackPolicy::HalveOmega => "halve-omega",
        FallbackPolicy::Stop => "stop",
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: RawDomain,
    mesh: RawMesh,
    interaction: RawInteraction,
    component: Vec<RawComponent>,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x: [f64; 2],
    y: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    elements_per_dir: usize,
    #[serde(default = "default_quad_order")]
    quad_order: usize,
}

fn default_quad_order() -> usize {
    rotbec::model::DEFAULT_QUAD_ORDER
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    kappa: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    mass: f64,
    omega: f64,
    #[serde(default = "default_margin")]
    margin: f64,
    potential: RawPotential,
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    a: f64,
    b: f64,
    #[serde(default)]
    c: f64,
    #[serde(default)]
    d: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    step: String,
    tol: f64,
    tol_cg: f64,
    max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    warm_start: Option<f64>,
    warm_start_max_iters: usize,
    fallback: String,
    record_every: usize,
}

impl Default for RawRun {
    fn default() -> Self {
        RawRun::from_options(&RunOptions::default())
    }
}

impl RawRun {
    fn from_options(o: &RunOptions) -> Self {
        let (method, omega) = match o.method {
            Method::EaRgd => ("earg", None),
            Method::LagrRgd(w) => ("lagr", Some(w)),
        };
        RawRun {
            method: method.into(),
            omega,
            step: format_step(&o.step),
            tol: o.stop_residual,
            tol_cg: o.tol_cg,
            max_iters: o.max_iters,
            warm_start: o.warm_start_residual,
            warm_start_max_iters: o.warm_start_max_iters,
            fallback: format_fallback(o.fallback).into(),
            record_every: o.record_every,
        }
    }

    fn into_options(self) -> Result<RunOptions> {
        Ok(RunOptions {
            method: parse_method(&self.method, self.omega)?,
            step: parse_step(&self.step)?,
            stop_residual: self.tol,
            max_iters: self.max_iters,
            tol_cg: self.tol_cg,
            warm_start_residual: self.warm_start,
            warm_start_max_iters: self.warm_start_max_iters,
            fallback: parse_fallback(&self.fallback)?,
            record_every: self.record_every,
        })
    }
}

impl RawConfig {
    fn from_config(c: &ConfigFile) -> Self {
        let m = &c.model;
        let d = m.domain;
        RawConfig {
            domain: RawDomain { x: [d.ax, d.bx], y: [d.ay, d.by] },
            mesh: RawMesh { elements_per_dir: m.elements_per_dir, quad_order: m.quad_order },
            interaction: RawInteraction { kappa: m.interaction.clone() },
            component: (0..m.p())
                .map(|j| {
                    let v = m.potentials[j];
                    RawComponent {
                        mass: m.masses[j],
                        omega: m.frequencies[j],
                        margin: m.assumption_margin[j],
                        potential: RawPotential {
                            a: v.a,
                            b: v.b,
                            c: v.c,
                            d: v.d,
                            alpha: v.alpha,
                            beta: v.beta,
                        },
                    }
                })
                .collect(),
            run: RawRun::from_options(&c.run),
        }
    }

    fn into_config(self) -> Result<ConfigFile> {
        let model = ModelSpec {
            domain: Rect {
                ax: self.domain.x[0],
                bx: self.domain.x[1],
                ay: self.domain.y[0],
                by: self.domain.y[1],
            },
            elements_per_dir: self.mesh.elements_per_dir,
            quad_order: self.mesh.quad_order,
            masses: self.component.iter().map(|c| c.mass).collect(),
            frequencies: self.component.iter().map(|c| c.omega).collect(),
            potentials: self
                .component
                .iter()
                .map(|c| Potential {
                    a: c.potential.a,
                    b: c.potential.b,
                    c: c.potential.c,
                    d: c.potential.d,
                    alpha: c.potential.alpha,
                    beta: c.potential.beta,
                })
                .collect(),
            interaction: self.interaction.kappa,
            assumption_margin: self.component.iter().map(|c| c.margin).collect(),
        };
        model.validate()?;
        Ok(ConfigFile { model, run: self.run.into_options()? })
    }
}
