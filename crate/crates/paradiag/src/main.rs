use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use paradiag::config::{parse_list, parse_objective, Overrides};
use paradiag::output;
use paradiag::run::{default_threads, SweepParam, SweepSpec};
use paradiag::{run_solve, run_spectrum, run_sweep, run_validate, Equation, ScaleMode};

/// Exit code for a solve or sweep that ran but did not converge everywhere.
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "paradiag", version, about = "Parallel-in-time preconditioned solves for linear-quadratic optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write a one-row CSV.
    Solve(Common),
    /// Analytic eigenvalues of the preconditioned system, one row per spatial mode.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Spatial eigenvalues to use instead of the operator's own, comma-separated.
        #[arg(long, value_name = "LIST")]
        sigma: Option<String>,
        /// Append the L → ∞ and τ → 0 limit values.
        #[arg(long)]
        limits: bool,
    },
    /// Iteration-count table: one row per L, one column per parameter value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Column parameter: T_ref (alias T), gamma or d.
        #[arg(long, default_value = "T_ref")]
        param: String,
        /// Column values, comma-separated (default: the single configured value).
        #[arg(long, value_name = "LIST")]
        values: Option<String>,
        /// Worker threads (default: available cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Permit L above 300.
        #[arg(long)]
        allow_large_l: bool,
    },
    /// Run the built-in oracle checks and print a pass/fail summary.
    Validate,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key=value file with defaults for any of the flags below; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// tracking | terminal
    #[arg(long)]
    objective: Option<String>,
    /// diffusion1d | diffusion2d | advdiff2d
    #[arg(long)]
    equation: Option<String>,
    /// Grid side (2D) or cell count (1D).
    #[arg(long)]
    m: Option<usize>,
    /// Number of time steps; a comma-separated list for sweeps.
    #[arg(long = "L", value_name = "L")]
    l: Option<String>,
    #[arg(long = "T-ref", value_name = "T")]
    t_ref: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Diffusion coefficient (advdiff2d).
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// GMRES relative tolerance on the preconditioned residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// horizon | timestep
    #[arg(long)]
    scale_mode: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        let flags = Overrides {
            objective: self.objective.as_deref().map(parse_objective).transpose()?,
            equation: self.equation.as_deref().map(str::parse::<Equation>).transpose()?,
            m: self.m,
            l: self.l.as_deref().map(parse_list::<usize>).transpose().context("--L")?,
            t_ref: self.t_ref,
            gamma: self.gamma,
            d: self.d,
            alpha: self.alpha,
            tol: self.tol,
            max_iter: self.max_iter,
            scale_mode: self.scale_mode.as_deref().map(str::parse::<ScaleMode>).transpose()?,
            out: self.out.clone(),
        };
        Ok(match &self.config {
            Some(path) => flags.or(Overrides::from_file(path)?),
            None => flags,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = common.overrides()?.resolve();
            let out = run_solve(&cfg)?;
            output::write_solve(output::sink(cfg.out.as_deref())?, std::slice::from_ref(&out.record))?;
            Ok(converged_code(out.record.converged))
        }
        Command::Spectrum { common, sigma, limits } => {
            let cfg = common.overrides()?.resolve();
            let sigma = sigma.as_deref().map(parse_list::<f64>).transpose().context("--sigma")?;
            let run = run_spectrum(&cfg, sigma.as_deref(), limits)?;
            output::write_spectrum(output::sink(cfg.out.as_deref())?, &run)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            common,
            param,
            values,
            threads,
            allow_large_l,
        } => {
            let o = common.overrides()?;
            let cfg = o.resolve();
            let l_values = o.l.clone().unwrap_or_else(|| paradiag::config::DEFAULT_L_VALUES.to_vec());
            let param: SweepParam = param.parse()?;
            let values = match values {
                Some(v) => parse_list::<f64>(&v).context("--values")?,
                None => vec![match param {
                    SweepParam::TRef => cfg.t_ref,
                    SweepParam::Gamma => cfg.gamma,
                    SweepParam::D => cfg.d,
                }],
            };
            let mut spec = SweepSpec::new(cfg.clone(), l_values).with_column(param, values);
            spec.threads = threads.unwrap_or_else(default_threads);
            spec.allow_large_l = allow_large_l;
            let table = run_sweep(&spec)?;
            output::write_sweep(output::sink(cfg.out.as_deref())?, &table)?;
            if let Some(path) = &cfg.out {
                let cells = output::cells_path(path);
                output::write_sweep_cells(output::sink(Some(&cells))?, &table)?;
                info!("per-cell details in {}", cells.display());
            }
            let all_converged = table.cells().all(|c| c.converged);
            Ok(converged_code(all_converged))
        }
        Command::Validate => {
            let report = run_validate();
            println!("{report}");
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn converged_code(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    }
}
