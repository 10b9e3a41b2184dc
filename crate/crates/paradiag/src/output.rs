//! CSV output. Numbers use Rust's shortest round-trip formatting, so identical runs give
//! byte-identical files (apart from the `wall_ms` column of a solve).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::objective_name;
use crate::run::{SolveRecord, SpectrumRun, SweepTable};

pub const SOLVE_COLUMNS: [&str; 14] = [
    "objective",
    "equation",
    "L",
    "M",
    "T",
    "tau",
    "gamma",
    "d",
    "alpha",
    "iterations",
    "converged",
    "final_relres_precond",
    "final_relres_true",
    "wall_ms",
];

pub const SPECTRUM_COLUMNS: [&str; 9] = [
    "sigma_hat",
    "gamma_hat",
    "phi",
    "psi",
    "theta1_re",
    "theta1_im",
    "theta2_re",
    "theta2_im",
    "in_semidisk",
];

const LIMIT_COLUMNS: [&str; 4] = [
    "horizon_theta1_re",
    "horizon_theta1_im",
    "timestep_theta1_re",
    "timestep_theta1_im",
];

/// Shortest round-trip form; exponent notation outside `[1e-3, 1e6)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-3..1e6).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// `path` or standard output.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_solve<W: Write>(w: W, records: &[SolveRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SOLVE_COLUMNS)?;
    for r in records {
        out.write_record([
            objective_name(r.objective).to_string(),
            r.equation.to_string(),
            r.l.to_string(),
            r.m.to_string(),
            num(r.horizon),
            num(r.tau),
            num(r.gamma),
            r.d.map(num).unwrap_or_default(),
            num(r.alpha),
            r.iterations.to_string(),
            r.converged.to_string(),
            num(r.final_relres_precond),
            num(r.final_relres_true),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_spectrum<W: Write>(w: W, run: &SpectrumRun) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = SPECTRUM_COLUMNS.to_vec();
    if run.limits.is_some() {
        header.extend(LIMIT_COLUMNS);
    }
    out.write_record(&header)?;
    for (k, r) in run.report.records.iter().enumerate() {
        let mut row = vec![
            num(r.mode.sigma_hat),
            num(r.mode.gamma_hat),
            num(r.mode.phi),
            num(r.mode.psi),
            num(r.theta1.re),
            num(r.theta1.im),
            num(r.theta2.re),
            num(r.theta2.im),
            r.status.contained().to_string(),
        ];
        if let Some(lim) = &run.limits {
            for z in [lim[k].horizon, lim[k].timestep] {
                match z {
                    Some(z) => row.extend([num(z.re), num(z.im)]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// The `#` metadata line of a sweep table.
pub fn sweep_metadata(t: &SweepTable) -> String {
    let s = &t.spec;
    let b = &s.base;
    let mode = b.scale_mode;
    let col = s.param.name(mode);
    let per_col = |f: &dyn Fn(usize) -> f64| {
        (0..s.values.len())
            .map(|j| num(f(j)))
            .collect::<Vec<_>>()
            .join(";")
    };
    let l0 = s.l_values[0];
    // the row-invariant quantity of the regime, per column
    let invariant = match mode {
        crate::config::ScaleMode::Horizon => format!("tau={}", per_col(&|j| s.step_and_horizon(l0, j).0)),
        crate::config::ScaleMode::Timestep => format!("T={}", per_col(&|j| s.step_and_horizon(l0, j).1)),
    };
    let mut fixed = vec![
        format!("objective={}", objective_name(b.objective)),
        format!("equation={}", b.equation),
        format!("m={}", b.m),
        format!("M={}", b.spatial_order()),
        format!("scale_mode={mode}"),
        format!("column={col}"),
        invariant,
        format!("alpha={}", num(b.alpha)),
        format!("tol={}", num(b.tol)),
        format!("max_iter={}", b.max_iter),
    ];
    use crate::run::SweepParam::*;
    if s.param != TRef {
        fixed.push(format!("T_ref={}", num(b.t_ref)));
    }
    if s.param != Gamma {
        fixed.push(format!("gamma={}", num(b.gamma)));
    }
    if s.param != D && b.equation == crate::config::Equation::AdvDiff2d {
        fixed.push(format!("d={}", num(b.d)));
    }
    format!("# {}", fixed.join(" "))
}

pub fn write_sweep<W: Write>(mut w: W, t: &SweepTable) -> Result<()> {
    writeln!(w, "{}", sweep_metadata(t))?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["L".to_string()];
    header.extend(t.spec.values.iter().map(|&v| num(v)));
    out.write_record(&header)?;
    for row in &t.rows {
        let mut rec = vec![row[0].l.to_string()];
        rec.extend(row.iter().map(|c| c.label()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Long format, one line per cell, with the converged flag and the residual.
pub fn write_sweep_cells<W: Write>(w: W, t: &SweepTable) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    // `T` is its own column here, so the swept horizon keeps its reference name
    let col = t.spec.param.name(crate::config::ScaleMode::Horizon);
    out.write_record(["L", col, "tau", "T", "iterations", "converged", "final_relres_true", "error"])?;
    for c in t.cells() {
        out.write_record([
            c.l.to_string(),
            num(c.value),
            num(c.tau),
            num(c.horizon),
            c.iterations.to_string(),
            c.converged.to_string(),
            num(c.final_relres_true),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `table.csv` → `table.cells.csv`.
pub fn cells_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.cells.csv"))
}
