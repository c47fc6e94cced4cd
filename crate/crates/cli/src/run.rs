//! Run orchestration for the four modes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use radhydro_core::error_analysis::{
    energy, error_fields, fit_rate, gamma_bound_check, trig_profile, well_prepared_init, EnergyRecord,
};
use radhydro_core::fluid::{FluidParams, FluidState};
use radhydro_core::kinetic::{make_ordinates, moment_system_check, KineticField};
use radhydro_core::radiation::{
    limit_closure_residual, limit_i0, limit_q, limit_q_operator_form, RadiationMoments,
};
use radhydro_core::spectral::{quartic, sobolev_norm, SpectralField, VectorField};
use radhydro_core::timestepper::{cfl_dt, step_eps, step_limit, EpsState, LimitState, StepControl};

use crate::config::{Mode, RunConfig};
use crate::output::{emit_series, emit_summary, OutputError, Series};

pub const SUMMARY_FILE: &str = "summary.json";
pub const LIMIT_SERIES_FILE: &str = "limit.csv";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("solver failed ({}, t = {time}): {source}", describe_run(*.eps))]
    Solver {
        eps: Option<f64>,
        time: f64,
        #[source]
        source: radhydro_core::Error,
    },

    #[error("analysis failed: {0}")]
    Analysis(#[source] radhydro_core::Error),

    #[error("cannot build thread pool: {0}")]
    Threads(String),

    #[error(transparent)]
    Output(#[from] OutputError),
}

fn describe_run(eps: Option<f64>) -> String {
    match eps {
        Some(e) => format!("eps = {e}"),
        None => "limit run".into(),
    }
}

fn solver(eps: Option<f64>, time: f64) -> impl FnOnce(radhydro_core::Error) -> RunError {
    move |source| RunError::Solver { eps, time, source }
}

/// One acceptance bound and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: None,
            upper: Some(upper),
            pass: value <= upper,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: Some(lower),
            upper: None,
            pass: value >= lower,
        }
    }

    fn within(name: impl Into<String>, value: f64, [lo, hi]: [f64; 2]) -> Self {
        Self {
            name: name.into(),
            value,
            lower: Some(lo),
            upper: Some(hi),
            pass: lo <= value && value <= hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormAt {
    pub sobolev_index: u32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsRunSummary {
    pub eps: f64,
    pub hypothesis_lhs: f64,
    pub l0: f64,
    pub sup_fluid_error: Vec<NormAt>,
    pub sup_radiation_error: Vec<NormAt>,
    pub max_gamma_over_eps2: f64,
    pub gamma_pass: bool,
    pub mass_drift: f64,
    pub steps: usize,
    pub series_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRunSummary {
    pub max_closure_residual: f64,
    pub mass_drift: f64,
    pub steps: usize,
    pub series_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFitBlock {
    pub family: String,
    pub sobolev_index: u32,
    pub eps_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub zeroth_residual: f64,
    pub first_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureReport {
    pub ordinates: usize,
    pub moment_checks: Vec<MomentCheck>,
    pub relaxation_time: f64,
    pub relaxation_error: f64,
    pub closure_residual: f64,
    pub operator_form_mismatch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub config: RunConfig,
    /// Logged rather than written so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_seconds: f64,
    pub eps_runs: Vec<EpsRunSummary>,
    pub limit_run: Option<LimitRunSummary>,
    pub rate_fits: Vec<RateFitBlock>,
    pub l0_spread: Option<f64>,
    pub gamma_growth: Option<f64>,
    pub closure: Option<ClosureReport>,
    pub checks: Vec<Check>,
    pub exit_status: i32,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn rate_fit(&self, family: &str, s: u32) -> Option<&RateFitBlock> {
        self.rate_fits
            .iter()
            .find(|b| b.family == family && b.sobolev_index == s)
    }
}

/// Summary plus the named time series of a finished run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub series: Vec<(String, Series)>,
}

impl RunOutput {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Writes every series and the summary into `dir`, returning the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
        std::fs::create_dir_all(dir).map_err(|e| OutputError::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut written = Vec::new();
        for (name, s) in &self.series {
            let p = dir.join(name);
            emit_series(s, &p)?;
            written.push(p);
        }
        let p = dir.join(SUMMARY_FILE);
        emit_summary(&self.summary, &p)?;
        written.push(p);
        Ok(written)
    }
}

pub fn eps_series_file(eps: f64) -> String {
    format!("eps_{eps}.csv")
}

pub fn base_state(cfg: &RunConfig) -> Result<FluidState, RunError> {
    let g = cfg.grid();
    let init = &cfg.initial;
    let rho = trig_profile(g, &init.rho.terms());
    let theta = trig_profile(g, &init.theta.terms());
    let u = VectorField::new(init.u.iter().map(|p| trig_profile(g, &p.terms())).collect())
        .map_err(solver(None, 0.0))?;
    FluidState::new(rho, u, theta).map_err(solver(None, 0.0))
}

fn relative_drift(mass: f64, mass0: f64) -> f64 {
    (mass - mass0).abs() / mass0.abs()
}

fn march_limit(s: &mut LimitState, target: f64, p: &FluidParams, c: &StepControl, steps: &mut usize) -> Result<(), RunError> {
    let control = StepControl { t_end: target, ..*c };
    while target - s.time > 1e-14 * target.max(1.0) {
        let dt = cfl_dt(&s.fluid, s.time, p, None, &control);
        *s = step_limit(s, p, dt).map_err(solver(None, s.time))?;
        *steps += 1;
    }
    s.time = target;
    Ok(())
}

fn march_eps(s: &mut EpsState, target: f64, p: &FluidParams, eps: f64, c: &StepControl, steps: &mut usize) -> Result<(), RunError> {
    let control = StepControl { t_end: target, ..*c };
    while target - s.time > 1e-14 * target.max(1.0) {
        let dt = cfl_dt(&s.fluid, s.time, p, Some(eps), &control);
        *s = step_eps(s, p, eps, dt).map_err(solver(Some(eps), s.time))?;
        *steps += 1;
    }
    s.time = target;
    Ok(())
}

struct LimitRun {
    states: Vec<LimitState>,
    summary: LimitRunSummary,
    series: Series,
}

fn run_limit(cfg: &RunConfig, base: &FluidState) -> Result<LimitRun, RunError> {
    let p = cfg.fluid_params();
    let c = cfg.step_control();
    let mut columns = vec!["time".to_string()];
    for &s in &cfg.sobolev_indices {
        columns.extend(["rho", "u", "theta"].map(|f| format!("{f}_s{s}")));
    }
    columns.extend(["closure_residual".into(), "mass".into()]);
    let mut series = Series::new(columns);

    let mass0 = base.mass();
    let mut state = LimitState::new(base.clone(), 0.0).map_err(solver(None, 0.0))?;
    let mut steps = 0;
    let (mut max_residual, mut max_drift) = (0.0f64, 0.0f64);
    let mut states = Vec::new();
    for t in cfg.output_times() {
        march_limit(&mut state, t, &p, &c, &mut steps)?;
        let f = &state.fluid;
        let residual = limit_closure_residual(&f.theta, &state.flux()).map_err(RunError::Analysis)?;
        let mass = f.mass();
        max_residual = max_residual.max(residual);
        max_drift = max_drift.max(relative_drift(mass, mass0));
        let mut row = vec![t];
        for &s in &cfg.sobolev_indices {
            row.extend([sobolev_norm(&f.rho, s), sobolev_norm(&f.u, s), sobolev_norm(&f.theta, s)]);
        }
        row.extend([residual, mass]);
        series.push(row);
        states.push(state.clone());
    }
    Ok(LimitRun {
        states,
        summary: LimitRunSummary {
            max_closure_residual: max_residual,
            mass_drift: max_drift,
            steps,
            series_file: LIMIT_SERIES_FILE.into(),
        },
        series,
    })
}

fn eps_columns(cfg: &RunConfig) -> Vec<String> {
    let mut c = vec!["time".to_string()];
    for &s in &cfg.sobolev_indices {
        c.extend(["rho", "u", "theta", "i0", "i1"].map(|f| format!("{f}_s{s}")));
    }
    for &s in &cfg.sobolev_indices {
        c.extend(
            ["fluid_error", "radiation_error", "fluid_energy", "full_energy", "gamma"]
                .map(|f| format!("{f}_s{s}")),
        );
    }
    c.push("mass".into());
    c
}

fn run_eps_member(
    cfg: &RunConfig,
    base: &FluidState,
    limit: &[LimitState],
    eps: f64,
) -> Result<(EpsRunSummary, Series), RunError> {
    let p = cfg.fluid_params();
    let c = cfg.step_control();
    let rate_s = cfg.rate_sobolev_index;
    let shapes = cfg
        .shape_spec()
        .build(cfg.grid())
        .map_err(RunError::Analysis)?;
    let wp = well_prepared_init(base, eps, cfg.perturbation.amp, &shapes, rate_s)
        .map_err(solver(Some(eps), 0.0))?;

    let mut series = Series::new(eps_columns(cfg));
    let n_s = cfg.sobolev_indices.len();
    let mut sup_fluid = vec![0.0f64; n_s];
    let mut sup_rad = vec![0.0f64; n_s];
    let mut records: Vec<EnergyRecord> = Vec::new();
    let mass0 = wp.eps_state.fluid.mass();
    let mut max_drift = 0.0f64;
    let mut steps = 0;
    let mut state = wp.eps_state;

    for (t, reference) in cfg.output_times().into_iter().zip(limit) {
        march_eps(&mut state, t, &p, eps, &c, &mut steps)?;
        let err = error_fields(&state, reference).map_err(RunError::Analysis)?;
        let mut row = vec![t];
        for &s in &cfg.sobolev_indices {
            let f = &state.fluid;
            row.extend([
                sobolev_norm(&f.rho, s),
                sobolev_norm(&f.u, s),
                sobolev_norm(&f.theta, s),
                sobolev_norm(&state.rad.i0, s),
                sobolev_norm(&state.rad.i1, s),
            ]);
        }
        for (k, &s) in cfg.sobolev_indices.iter().enumerate() {
            let fe = err.fluid_norm(s);
            let re = err.radiation_norm(s);
            sup_fluid[k] = sup_fluid[k].max(fe);
            sup_rad[k] = sup_rad[k].max(re);
            let rec = energy(&err, s, eps);
            if s == rate_s {
                records.push(rec);
            }
            row.extend([fe, re, rec.fluid_energy, rec.full_energy, rec.gamma]);
        }
        let mass = state.fluid.mass();
        max_drift = max_drift.max(relative_drift(mass, mass0));
        row.push(mass);
        series.push(row);
    }

    let (gamma, gamma_pass) = gamma_bound_check(&records, eps, cfg.bounds.gamma_max);
    let norms = |v: &[f64]| {
        cfg.sobolev_indices
            .iter()
            .zip(v)
            .map(|(&s, &value)| NormAt { sobolev_index: s, value })
            .collect()
    };
    Ok((
        EpsRunSummary {
            eps,
            hypothesis_lhs: wp.hypothesis_lhs,
            l0: wp.l0,
            sup_fluid_error: norms(&sup_fluid),
            sup_radiation_error: norms(&sup_rad),
            max_gamma_over_eps2: gamma,
            gamma_pass,
            mass_drift: max_drift,
            steps,
            series_file: eps_series_file(eps),
        },
        series,
    ))
}

fn sup_at(v: &[NormAt], s: u32) -> f64 {
    v.iter().find(|n| n.sobolev_index == s).map_or(f64::NAN, |n| n.value)
}

/// `max/min` of the reported `L₀`; a sweep whose values are all zero counts as
/// exactly ε-independent.
pub fn l0_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else {
        max / min
    }
}

/// Largest ratio of `sup Γ/ε²` at a smaller ε to that at the next larger ε.
pub fn gamma_growth(by_decreasing_eps: &[f64]) -> f64 {
    by_decreasing_eps
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max)
}

fn rate_checks(cfg: &RunConfig, runs: &[EpsRunSummary]) -> Result<(Vec<RateFitBlock>, Vec<Check>), RunError> {
    let mut blocks = Vec::new();
    for family in ["fluid", "radiation"] {
        for &s in &cfg.sobolev_indices {
            let pairs: Vec<(f64, f64)> = runs
                .iter()
                .map(|r| {
                    let v = if family == "fluid" { &r.sup_fluid_error } else { &r.sup_radiation_error };
                    (r.eps, sup_at(v, s))
                })
                .collect();
            let fit = fit_rate(&pairs).map_err(RunError::Analysis)?;
            blocks.push(RateFitBlock {
                family: family.into(),
                sobolev_index: s,
                eps_values: fit.eps_values,
                errors: fit.errors,
                slope: fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
            });
        }
    }
    let b = &cfg.bounds;
    let s = cfg.rate_sobolev_index;
    let find = |fam: &str| blocks.iter().find(|x| x.family == fam && x.sobolev_index == s).unwrap();
    let fluid = find("fluid");
    let rad = find("radiation");
    let checks = vec![
        Check::within(format!("fluid_slope_s{s}"), fluid.slope, b.fluid_slope),
        Check::at_least(format!("fluid_r_squared_s{s}"), fluid.r_squared, b.fluid_r_squared_min),
        Check::within(format!("radiation_slope_s{s}"), rad.slope, b.radiation_slope),
    ];
    Ok((blocks, checks))
}

fn closure_report(cfg: &RunConfig) -> Result<ClosureReport, RunError> {
    let base = base_state(cfg)?;
    let theta = &base.theta;
    let cl = &cfg.closure;
    let eps = cl.eps;

    let mut rad = RadiationMoments::new(quartic(theta), VectorField::zeros(cfg.grid()))
        .map_err(RunError::Analysis)?;
    for _ in 0..cl.relaxation_steps {
        rad = radhydro_core::timestepper::radiation_exact_substep(&rad, theta, eps, eps);
    }
    let relaxation_error = (&rad - &RadiationMoments::relaxed(theta)).sobolev_norm(0);

    let q = limit_q(theta);
    let closure_residual = limit_closure_residual(theta, &q).map_err(RunError::Analysis)?;
    let operator_form_mismatch = limit_q_operator_form(theta).max_diff(&q);

    let ords = make_ordinates(cfg.grid.n_dims, cl.ordinates).map_err(RunError::Analysis)?;
    let g = cfg.grid();
    let p1 = RadiationMoments::new(
        &limit_i0(theta) + &SpectralField::from_fn(g, |x| 0.05 * x[0].sin()),
        &q + &VectorField::from_fn(g, |x, j| 0.02 * (x[j] + 0.3).cos()),
    )
    .map_err(RunError::Analysis)?;
    let field = KineticField::from_moments(&p1, ords.clone()).map_err(RunError::Analysis)?;
    let moment_checks = cl
        .sigma
        .iter()
        .map(|&[sa, ss]| {
            let (r0, r1) = moment_system_check(&field, theta, eps, sa, ss).map_err(RunError::Analysis)?;
            Ok(MomentCheck {
                sigma_a: sa,
                sigma_s: ss,
                zeroth_residual: r0,
                first_residual: r1,
            })
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    Ok(ClosureReport {
        ordinates: ords.len(),
        moment_checks,
        relaxation_time: eps * cl.relaxation_steps as f64,
        relaxation_error,
        closure_residual,
        operator_form_mismatch,
    })
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes `cfg`, running the members of an ε-sweep concurrently on
/// `threads` workers (the global pool when `None`). Results are merged in
/// the configured ε order, so the output does not depend on scheduling.
pub fn run(cfg: &RunConfig, threads: Option<usize>) -> Result<RunOutput, RunError> {
    let start = Instant::now();
    let b = &cfg.bounds;
    let mut summary = RunSummary {
        mode: cfg.mode,
        config: cfg.clone(),
        wall_time_seconds: 0.0,
        eps_runs: Vec::new(),
        limit_run: None,
        rate_fits: Vec::new(),
        l0_spread: None,
        gamma_growth: None,
        closure: None,
        checks: Vec::new(),
        exit_status: 0,
    };
    let mut series = Vec::new();

    match cfg.mode {
        Mode::ClosureCheck => {
            let r = closure_report(cfg)?;
            for m in &r.moment_checks {
                summary.checks.push(Check::at_most(
                    format!("moment_residual_sa{}_ss{}", m.sigma_a, m.sigma_s),
                    m.zeroth_residual.max(m.first_residual),
                    b.moment_residual_max,
                ));
            }
            summary.checks.push(Check::at_most("relaxation_error", r.relaxation_error, b.relaxation_error_max));
            summary.checks.push(Check::at_most("closure_residual", r.closure_residual, b.closure_residual_max));
            summary.closure = Some(r);
        }
        Mode::SimulateLimit | Mode::SimulateEps | Mode::ConvergenceStudy => {
            let base = base_state(cfg)?;
            let limit = run_limit(cfg, &base)?;
            let mut drift = limit.summary.mass_drift;
            summary
                .checks
                .push(Check::at_most("closure_residual", limit.summary.max_closure_residual, b.closure_residual_max));
            series.push((LIMIT_SERIES_FILE.to_string(), limit.series));

            let eps_values: Vec<f64> = match cfg.mode {
                Mode::SimulateEps => vec![cfg.eps.expect("validated")],
                Mode::ConvergenceStudy => cfg.eps_list.clone().expect("validated"),
                _ => Vec::new(),
            };
            let members = with_pool(threads, || {
                eps_values
                    .par_iter()
                    .map(|&e| run_eps_member(cfg, &base, &limit.states, e))
                    .collect::<Result<Vec<_>, RunError>>()
            })??;
            for (run, s) in members {
                drift = drift.max(run.mass_drift);
                series.push((run.series_file.clone(), s));
                summary.eps_runs.push(run);
            }

            if !summary.eps_runs.is_empty() {
                let gammas: Vec<f64> = summary.eps_runs.iter().map(|r| r.max_gamma_over_eps2).collect();
                let worst = gammas.iter().copied().fold(0.0, f64::max);
                summary.checks.push(Check::at_most("gamma_max_over_eps2", worst, b.gamma_max));
            }
            if cfg.mode == Mode::ConvergenceStudy {
                let (blocks, checks) = rate_checks(cfg, &summary.eps_runs)?;
                summary.rate_fits = blocks;
                summary.checks.extend(checks);

                let l0: Vec<f64> = summary.eps_runs.iter().map(|r| r.l0).collect();
                let spread = l0_spread(&l0);
                summary.checks.push(Check::at_most("l0_spread", spread, b.l0_spread_max));
                summary.l0_spread = Some(spread);

                let gammas: Vec<f64> = summary.eps_runs.iter().map(|r| r.max_gamma_over_eps2).collect();
                let growth = gamma_growth(&gammas);
                summary.checks.push(Check::at_most("gamma_growth", growth, b.gamma_growth_max));
                summary.gamma_growth = Some(growth);
            }
            summary.checks.push(Check::at_most("mass_drift", drift, b.mass_drift_max));
            summary.limit_run = Some(limit.summary);
        }
    }

    summary.exit_status = if summary.passed() { 0 } else { 1 };
    summary.wall_time_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "{} finished in {:.3} s ({} checks, {} failed)",
        cfg.mode,
        summary.wall_time_seconds,
        summary.checks.len(),
        summary.checks.iter().filter(|c| !c.pass).count()
    );
    Ok(RunOutput { summary, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_and_growth() {
        assert_eq!(l0_spread(&[0.0, 0.0, 0.0]), 1.0);
        assert!((l0_spread(&[2.0, 3.0, 2.5]) - 1.5).abs() < 1e-15);
        assert_eq!(gamma_growth(&[4.0, 2.0, 1.0]), 0.5);
        assert_eq!(gamma_growth(&[1.0, 3.0, 3.0]), 3.0);
    }

    #[test]
    fn check_constructors() {
        assert!(Check::within("x", 1.0, [0.9, 1.3]).pass);
        assert!(!Check::within("x", 1.4, [0.9, 1.3]).pass);
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(Check::at_least("x", 0.99, 0.98).pass);
    }
}
