//! JSON run configuration: strict schema, defaults and validation.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use radhydro_core::error_analysis::{ShapeSpec, TrigTerm};
use radhydro_core::fluid::FluidParams;
use radhydro_core::kinetic::make_ordinates;
use radhydro_core::spectral::{Grid, MAX_SOBOLEV_INDEX};
use radhydro_core::timestepper::StepControl;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SimulateEps,
    SimulateLimit,
    ConvergenceStudy,
    ClosureCheck,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::SimulateEps => "simulate-eps",
            Mode::SimulateLimit => "simulate-limit",
            Mode::ConvergenceStudy => "convergence-study",
            Mode::ClosureCheck => "closure-check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: cannot read config: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}\n    {context}")]
    ParseError {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
        context: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    ValidationError { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::ValidationError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_dims: usize,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeStepSpec {
    pub dt_max: f64,
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
}

impl Default for TimeStepSpec {
    fn default() -> Self {
        Self {
            dt_max: 1e-3,
            cfl_advective: StepControl::DEFAULT_CFL,
            cfl_diffusive: StepControl::DEFAULT_CFL,
        }
    }
}

/// `cos · cos(k·x) + sin · sin(k·x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl ModeSpec {
    fn wave(k: &[i64], cos: f64, sin: f64) -> Self {
        Self { k: k.to_vec(), cos, sin }
    }

    fn terms(&self) -> impl Iterator<Item = TrigTerm> + '_ {
        let k = [self.k[0], self.k.get(1).copied().unwrap_or(0)];
        [(self.cos, 0.0), (self.sin, -FRAC_PI_2)]
            .into_iter()
            .filter(|(a, _)| *a != 0.0)
            .map(move |(a, phase)| TrigTerm::new(k, a, phase))
    }
}

fn to_terms(modes: &[ModeSpec]) -> Vec<TrigTerm> {
    modes.iter().flat_map(ModeSpec::terms).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
}

impl Profile {
    pub fn terms(&self) -> Vec<TrigTerm> {
        let mut t = vec![TrigTerm::new([0, 0], self.mean, 0.0)];
        t.extend(to_terms(&self.modes));
        t
    }
}

/// Background profiles of the limit problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub rho: Profile,
    pub u: Vec<Profile>,
    pub theta: Profile,
}

impl InitialSpec {
    /// `ρ = 1 + 0.1 sin x₁`, `uⱼ = 0.1 sin xⱼ`, `θ = 1 + 0.1 cos x₁`.
    pub fn default_for(n_dims: usize) -> Self {
        let e = |j: usize| {
            let mut k = vec![0; n_dims];
            k[j] = 1;
            k
        };
        Self {
            rho: Profile { mean: 1.0, modes: vec![ModeSpec::wave(&e(0), 0.0, 0.1)] },
            u: (0..n_dims)
                .map(|j| Profile { mean: 0.0, modes: vec![ModeSpec::wave(&e(j), 0.0, 0.1)] })
                .collect(),
            theta: Profile { mean: 1.0, modes: vec![ModeSpec::wave(&e(0), 0.1, 0.0)] },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub rho: Vec<ModeSpec>,
    pub u: Vec<Vec<ModeSpec>>,
    pub theta: Vec<ModeSpec>,
    pub i0: Vec<ModeSpec>,
    pub i1: Vec<Vec<ModeSpec>>,
}

impl ShapeConfig {
    pub fn to_spec(&self) -> ShapeSpec {
        ShapeSpec {
            rho: to_terms(&self.rho),
            u: self.u.iter().map(|m| to_terms(m)).collect(),
            theta: to_terms(&self.theta),
            i0: to_terms(&self.i0),
            i1: self.i1.iter().map(|m| to_terms(m)).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    pub amp: f64,
    /// Built-in low-mode shapes when absent.
    pub shapes: Option<ShapeConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureSpec {
    pub ordinates: usize,
    /// `(σ_a, σ_s)` pairs.
    pub sigma: Vec<[f64; 2]>,
    pub eps: f64,
    /// Relaxation substeps of length `ε` each.
    pub relaxation_steps: usize,
}

impl Default for ClosureSpec {
    fn default() -> Self {
        Self {
            ordinates: 8,
            sigma: vec![[1.0, 0.0], [1.0, 1.0]],
            eps: 0.05,
            relaxation_steps: 20,
        }
    }
}

/// Acceptance bounds checked at the end of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bounds {
    pub fluid_slope: [f64; 2],
    pub fluid_r_squared_min: f64,
    pub radiation_slope: [f64; 2],
    pub gamma_max: f64,
    /// Largest allowed ratio of `sup Γ/ε²` between consecutive sweep members
    /// (smaller ε over larger ε).
    pub gamma_growth_max: f64,
    pub l0_spread_max: f64,
    pub closure_residual_max: f64,
    pub mass_drift_max: f64,
    pub moment_residual_max: f64,
    pub relaxation_error_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            fluid_slope: [0.9, 1.3],
            fluid_r_squared_min: 0.98,
            radiation_slope: [0.45, 1.3],
            gamma_max: radhydro_core::error_analysis::DEFAULT_GAMMA_BOUND,
            gamma_growth_max: 2.0,
            l0_spread_max: 1.5,
            closure_residual_max: 1e-10,
            mass_drift_max: 1e-10,
            moment_residual_max: 1e-10,
            relaxation_error_max: 1e-8,
        }
    }
}

/// The document as written, before defaults that depend on other fields.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    grid: GridSpec,
    fluid: FluidSpec,
    eps: Option<f64>,
    eps_list: Option<Vec<f64>>,
    #[serde(default = "default_t_end")]
    t_end: f64,
    output_interval: Option<f64>,
    #[serde(default)]
    time_step: TimeStepSpec,
    initial: Option<InitialSpec>,
    #[serde(default)]
    perturbation: PerturbationSpec,
    sobolev_indices: Option<Vec<u32>>,
    rate_sobolev_index: Option<u32>,
    #[serde(default)]
    closure: ClosureSpec,
    #[serde(default)]
    bounds: Bounds,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
}

fn default_t_end() -> f64 {
    0.5
}

/// Validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub grid: GridSpec,
    pub fluid: FluidSpec,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub t_end: f64,
    pub output_interval: f64,
    pub time_step: TimeStepSpec,
    pub initial: InitialSpec,
    pub perturbation: PerturbationSpec,
    pub sobolev_indices: Vec<u32>,
    pub rate_sobolev_index: u32,
    pub closure: ClosureSpec,
    pub bounds: Bounds,
    pub output_dir: PathBuf,
    /// Reserved; every run is deterministic.
    pub seed: u64,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.n_dims, self.grid.points).expect("validated grid")
    }

    pub fn fluid_params(&self) -> FluidParams {
        FluidParams::new(self.fluid.mu, self.fluid.lambda, self.fluid.kappa)
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            dt_max: self.time_step.dt_max,
            cfl_advective: self.time_step.cfl_advective,
            cfl_diffusive: self.time_step.cfl_diffusive,
            t_end: self.t_end,
        }
    }

    pub fn shape_spec(&self) -> ShapeSpec {
        match &self.perturbation.shapes {
            Some(s) => s.to_spec(),
            None => ShapeSpec::default_for(self.grid.n_dims),
        }
    }

    /// Sampling times `0, Δ, 2Δ, …, t_end`.
    pub fn output_times(&self) -> Vec<f64> {
        let count = (self.t_end / self.output_interval - 1e-9).ceil().max(1.0) as usize;
        (0..=count)
            .map(|k| (k as f64 * self.output_interval).min(self.t_end))
            .collect()
    }
}

/// Default monitored Sobolev indices: `L²` and the smallest integer above
/// `n/2 + 2`.
pub fn default_sobolev_indices(n_dims: usize) -> Vec<u32> {
    vec![0, rate_index(n_dims)]
}

fn rate_index(n_dims: usize) -> u32 {
    if n_dims == 1 {
        3
    } else {
        4
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    load_config_for(path, None)
}

/// Loads `path`; `mode` (from the command line) fills in or must agree with
/// the document's `mode`.
pub fn load_config_for(path: &Path, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path, mode)
}

pub fn parse_config(text: &str, path: &Path, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        if inner.classify() == serde_json::error::Category::Data {
            ConfigError::ValidationError {
                field,
                message: inner.to_string(),
            }
        } else {
            let line = inner.line();
            ConfigError::ParseError {
                path: path.to_path_buf(),
                line,
                column: inner.column(),
                message: inner.to_string(),
                context: text.lines().nth(line.saturating_sub(1)).unwrap_or("").to_string(),
            }
        }
    })?;
    resolve(raw, mode)
}

fn resolve(raw: RawConfig, cli_mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let mode = match (raw.mode, cli_mode) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::invalid(
                "mode",
                format!("config says {a} but {b} was requested"),
            ))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(ConfigError::invalid("mode", "missing")),
    };

    let n = raw.grid.n_dims;
    let grid = Grid::new(n, raw.grid.points).map_err(|e| ConfigError::invalid("grid", e.to_string()))?;
    FluidParams::new(raw.fluid.mu, raw.fluid.lambda, raw.fluid.kappa)
        .validate(n)
        .map_err(|e| ConfigError::invalid("fluid", e.to_string()))?;

    let positive = |field: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::invalid(field, format!("must be positive and finite, got {v}")))
        }
    };

    if let Some(e) = raw.eps {
        positive("eps", e)?;
    }
    if let Some(list) = &raw.eps_list {
        for &e in list {
            positive("eps_list", e)?;
        }
        if list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::invalid("eps_list", "must be strictly decreasing"));
        }
    }
    match mode {
        Mode::SimulateEps if raw.eps.is_none() => {
            return Err(ConfigError::invalid("eps", "required for simulate-eps"))
        }
        Mode::ConvergenceStudy => match &raw.eps_list {
            None => return Err(ConfigError::invalid("eps_list", "required for convergence-study")),
            Some(l) if l.len() < 3 => {
                return Err(ConfigError::invalid("eps_list", "needs at least 3 entries"))
            }
            _ => {}
        },
        _ => {}
    }

    positive("t_end", raw.t_end)?;
    let output_interval = raw.output_interval.unwrap_or(raw.t_end / 10.0);
    positive("output_interval", output_interval)?;
    if output_interval > raw.t_end {
        return Err(ConfigError::invalid("output_interval", "exceeds t_end"));
    }

    let ts = raw.time_step;
    positive("time_step.dt_max", ts.dt_max)?;
    for (name, c) in [
        ("time_step.cfl_advective", ts.cfl_advective),
        ("time_step.cfl_diffusive", ts.cfl_diffusive),
    ] {
        if !(c > 0.0 && c <= 1.0) {
            return Err(ConfigError::invalid(name, format!("must lie in (0, 1], got {c}")));
        }
    }

    let initial = raw.initial.unwrap_or_else(|| InitialSpec::default_for(n));
    check_profile("initial.rho", &initial.rho, n)?;
    check_profile("initial.theta", &initial.theta, n)?;
    if initial.u.len() != n {
        return Err(ConfigError::invalid("initial.u", format!("needs {n} components")));
    }
    for (j, p) in initial.u.iter().enumerate() {
        check_profile(&format!("initial.u[{j}]"), p, n)?;
    }

    let pert = raw.perturbation;
    if !(pert.amp >= 0.0 && pert.amp.is_finite()) {
        return Err(ConfigError::invalid("perturbation.amp", "must be >= 0"));
    }
    if let Some(s) = &pert.shapes {
        for (name, modes) in [("rho", &s.rho), ("theta", &s.theta), ("i0", &s.i0)] {
            check_modes(&format!("perturbation.shapes.{name}"), modes, n)?;
        }
        for (name, comps) in [("u", &s.u), ("i1", &s.i1)] {
            if comps.len() != n {
                return Err(ConfigError::invalid(
                    &format!("perturbation.shapes.{name}"),
                    format!("needs {n} components"),
                ));
            }
            for c in comps {
                check_modes(&format!("perturbation.shapes.{name}"), c, n)?;
            }
        }
        s.to_spec()
            .build(grid)
            .map_err(|e| ConfigError::invalid("perturbation.shapes", e.to_string()))?;
    }

    let sobolev_indices = raw.sobolev_indices.unwrap_or_else(|| default_sobolev_indices(n));
    let rate_sobolev_index = raw.rate_sobolev_index.unwrap_or_else(|| rate_index(n));
    if sobolev_indices.is_empty() {
        return Err(ConfigError::invalid("sobolev_indices", "must not be empty"));
    }
    if sobolev_indices.iter().chain([&rate_sobolev_index]).any(|&s| s > MAX_SOBOLEV_INDEX) {
        return Err(ConfigError::invalid(
            "sobolev_indices",
            format!("indices above {MAX_SOBOLEV_INDEX} are not supported"),
        ));
    }
    let mut sobolev_indices = sobolev_indices;
    if !sobolev_indices.contains(&rate_sobolev_index) {
        sobolev_indices.push(rate_sobolev_index);
    }
    sobolev_indices.sort_unstable();
    sobolev_indices.dedup();

    let closure = raw.closure;
    make_ordinates(n, closure.ordinates)
        .map_err(|e| ConfigError::invalid("closure.ordinates", e.to_string()))?;
    positive("closure.eps", closure.eps)?;
    if closure.sigma.iter().any(|[a, s]| !(*a > 0.0) || !(*s >= 0.0)) {
        return Err(ConfigError::invalid("closure.sigma", "need sigma_a > 0 and sigma_s >= 0"));
    }

    Ok(RunConfig {
        mode,
        grid: raw.grid,
        fluid: raw.fluid,
        eps: raw.eps,
        eps_list: raw.eps_list,
        t_end: raw.t_end,
        output_interval,
        time_step: ts,
        initial,
        perturbation: pert,
        sobolev_indices,
        rate_sobolev_index,
        closure,
        bounds: raw.bounds,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("radhydro-out")),
        seed: raw.seed.unwrap_or(0),
    })
}

fn check_modes(field: &str, modes: &[ModeSpec], n: usize) -> Result<(), ConfigError> {
    match modes.iter().find(|m| m.k.len() != n) {
        Some(m) => Err(ConfigError::invalid(
            field,
            format!("wavevector {:?} must have {n} entries", m.k),
        )),
        None => Ok(()),
    }
}

fn check_profile(field: &str, p: &Profile, n: usize) -> Result<(), ConfigError> {
    check_modes(&format!("{field}.modes"), &p.modes, n)
}
