//! Drivers behind the `solve`, `sweep` and `spectrum` subcommands.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Result};
use log::{debug, warn};
use paradiag_core::allatonce::ObjectiveKind;
use paradiag_core::krylov::GmresConfig;
use paradiag_core::solve::{solve, Solution};
use paradiag_core::spectra::{horizon_limits, spectrum_report, timestep_limits, SpectrumReport};
use paradiag_core::Complex64;

use crate::config::{Equation, RunConfig, ScaleMode, DESK_L_MAX};
use crate::data::build_problem;

/// One row of the solve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub objective: ObjectiveKind,
    pub equation: Equation,
    pub l: usize,
    /// Spatial unknowns per time step.
    pub m: usize,
    pub horizon: f64,
    pub tau: f64,
    pub gamma: f64,
    /// Only meaningful for advection-diffusion.
    pub d: Option<f64>,
    pub alpha: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_relres_precond: f64,
    pub final_relres_true: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub record: SolveRecord,
    pub solution: Solution,
}

/// Solve one configuration at horizon `T`.
pub fn run_solve_at(cfg: &RunConfig, steps: usize, horizon: f64) -> Result<SolveOutcome> {
    let mut cfg = cfg.clone();
    cfg.l = steps;
    cfg.validate()?;
    let start = Instant::now();
    let p = build_problem(&cfg, steps, horizon)?;
    let gcfg = GmresConfig::new(cfg.tol, cfg.max_iter)?;
    let solution = solve(&p, Complex64::new(cfg.alpha, 0.0), gcfg)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    debug!(
        "{} {} L={} T={} -> {} iterations ({})",
        crate::config::objective_name(cfg.objective),
        cfg.equation,
        steps,
        horizon,
        solution.iterations,
        if solution.converged { "converged" } else { "not converged" }
    );
    Ok(SolveOutcome {
        record: SolveRecord {
            objective: cfg.objective,
            equation: cfg.equation,
            l: steps,
            m: cfg.spatial_order(),
            horizon,
            tau: p.tau(),
            gamma: cfg.gamma,
            d: (cfg.equation == Equation::AdvDiff2d).then_some(cfg.d),
            alpha: cfg.alpha,
            iterations: solution.iterations,
            converged: solution.converged,
            final_relres_precond: solution.final_relres_precond(),
            final_relres_true: solution.true_relres,
            wall_ms,
        },
        solution,
    })
}

/// A single solve uses `T = T_ref` in either regime.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    run_solve_at(cfg, cfg.l, cfg.t_ref)
}

/// The parameter varied across the columns of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TRef,
    Gamma,
    D,
}

impl FromStr for SweepParam {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            // `T` is the natural column label in the fixed-horizon regime
            "T_ref" | "t-ref" | "T-ref" | "T" | "t" => SweepParam::TRef,
            "gamma" => SweepParam::Gamma,
            "d" => SweepParam::D,
            _ => bail!("unknown sweep parameter '{s}' (T_ref | T | gamma | d)"),
        })
    }
}

impl SweepParam {
    pub fn name(self, mode: ScaleMode) -> &'static str {
        match (self, mode) {
            (SweepParam::TRef, ScaleMode::Horizon) => "T_ref",
            (SweepParam::TRef, ScaleMode::Timestep) => "T",
            (SweepParam::Gamma, _) => "gamma",
            (SweepParam::D, _) => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub l_values: Vec<usize>,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub threads: usize,
    pub allow_large_l: bool,
}

impl SweepSpec {
    /// Single column at the base configuration's own `T_ref`.
    pub fn new(base: RunConfig, l_values: Vec<usize>) -> Self {
        let t = base.t_ref;
        Self {
            base,
            l_values,
            param: SweepParam::TRef,
            values: vec![t],
            threads: default_threads(),
            allow_large_l: false,
        }
    }

    pub fn with_column(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.param = param;
        self.values = values;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() || self.values.is_empty() {
            bail!("a sweep needs at least one L and one column value");
        }
        if self.l_values.iter().any(|&l| l < 2) {
            bail!("every L must be at least 2");
        }
        if self.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            bail!("sweep values must be positive and finite");
        }
        if let Some(&big) = self.l_values.iter().find(|&&l| l > DESK_L_MAX) {
            if !self.allow_large_l {
                bail!("L = {big} exceeds {DESK_L_MAX}; pass --allow-large-l to run it");
            }
            warn!("L = {big} exceeds the desk-scale limit of {DESK_L_MAX}; expect long run times");
        }
        Ok(())
    }

    fn l_min(&self) -> usize {
        *self.l_values.iter().min().unwrap_or(&1)
    }

    /// Configuration and horizon of column `j`.
    pub fn column_config(&self, j: usize) -> RunConfig {
        let mut cfg = self.base.clone();
        let v = self.values[j];
        match self.param {
            SweepParam::TRef => cfg.t_ref = v,
            SweepParam::Gamma => cfg.gamma = v,
            SweepParam::D => cfg.d = v,
        }
        cfg
    }

    /// `(τ, T)` of the cell at `L`, column `j`.
    pub fn step_and_horizon(&self, l: usize, j: usize) -> (f64, f64) {
        let t_ref = self.column_config(j).t_ref;
        match self.base.scale_mode {
            ScaleMode::Horizon => {
                let tau = t_ref / self.l_min() as f64;
                (tau, tau * l as f64)
            }
            ScaleMode::Timestep => (t_ref / l as f64, t_ref),
        }
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub l: usize,
    pub value: f64,
    pub tau: f64,
    pub horizon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_relres_true: f64,
    pub error: Option<String>,
}

impl SweepCell {
    /// Table entry: the iteration count, or `inf-iters`.
    pub fn label(&self) -> String {
        if self.converged {
            self.iterations.to_string()
        } else {
            "inf-iters".to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub spec: SweepSpec,
    /// `rows[i][j]` is `L = l_values[i]`, column `values[j]`.
    pub rows: Vec<Vec<SweepCell>>,
}

impl SweepTable {
    pub fn column(&self, j: usize) -> Vec<&SweepCell> {
        self.rows.iter().map(|r| &r[j]).collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = &SweepCell> {
        self.rows.iter().flatten()
    }
}

/// Run every `(L, value)` cell; failures are recorded, never fatal.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let ncol = spec.values.len();
    let total = spec.l_values.len() * ncol;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepCell>>> = Mutex::new(vec![None; total]);
    let workers = spec.threads.clamp(1, total);

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= total {
                    break;
                }
                let cell = run_cell(spec, k / ncol, k % ncol);
                slots.lock().expect("sweep worker panicked")[k] = Some(cell);
            });
        }
    });

    let mut flat = slots.into_inner().expect("sweep worker panicked").into_iter();
    let rows = (0..spec.l_values.len())
        .map(|_| flat.by_ref().take(ncol).map(|c| c.expect("missing sweep cell")).collect())
        .collect();
    Ok(SweepTable {
        spec: spec.clone(),
        rows,
    })
}

fn run_cell(spec: &SweepSpec, i: usize, j: usize) -> SweepCell {
    let l = spec.l_values[i];
    let (tau, horizon) = spec.step_and_horizon(l, j);
    let cfg = spec.column_config(j);
    let mut cell = SweepCell {
        l,
        value: spec.values[j],
        tau,
        horizon,
        iterations: 0,
        converged: false,
        final_relres_true: f64::NAN,
        error: None,
    };
    match run_solve_at(&cfg, l, horizon) {
        Ok(out) => {
            cell.iterations = out.record.iterations;
            cell.converged = out.record.converged;
            cell.final_relres_true = out.record.final_relres_true;
        }
        Err(e) => {
            warn!("cell L={l}, {}={}: {e:#}", spec.param.name(spec.base.scale_mode), spec.values[j]);
            cell.error = Some(format!("{e:#}"));
        }
    }
    cell
}

/// Per-mode limit values `(θ₁ as L → ∞ at fixed τ, θ₁ as τ → 0 at fixed T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeLimits {
    pub horizon: Option<Complex64>,
    pub timestep: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRun {
    pub report: SpectrumReport,
    /// One entry per record when limits were requested.
    pub limits: Option<Vec<ModeLimits>>,
}

/// Analytic spectrum of the preconditioned system for `cfg` at `T = T_ref`.
pub fn run_spectrum(cfg: &RunConfig, sigma: Option<&[f64]>, with_limits: bool) -> Result<SpectrumRun> {
    cfg.validate()?;
    let p = build_problem(cfg, cfg.l, cfg.t_ref)?;
    let report = spectrum_report(&p, sigma, cfg.alpha)?;
    let sig: Vec<f64> = match sigma {
        Some(s) => s.to_vec(),
        None => p.operator().spectrum().map(|s| s.to_vec()).unwrap_or_default(),
    };
    let limits = with_limits.then(|| {
        report
            .records
            .iter()
            .zip(&sig)
            .map(|(r, &s)| ModeLimits {
                horizon: horizon_limits(&r.mode, cfg.objective).ok().map(|t| t.0),
                timestep: timestep_limits(s, cfg.gamma, cfg.t_ref, cfg.alpha, cfg.objective)
                    .ok()
                    .map(|t| t.0),
            })
            .collect()
    });
    Ok(SpectrumRun { report, limits })
}
