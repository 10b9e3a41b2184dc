//! Test-problem data: operators and sampled initial/target fields.

use std::f64::consts::PI;

use anyhow::Result;
use paradiag_core::allatonce::{ControlProblem, ObjectiveKind};
use paradiag_core::spatial::SpatialOperator;

use crate::config::{Equation, RunConfig};

/// `12π²`, the decay rate of the `sin(2πx₁)sin(2πx₂)` mode.
const K0: f64 = 12.0 * PI * PI;

pub fn operator(equation: Equation, m: usize, d: f64) -> Result<SpatialOperator> {
    Ok(match equation {
        Equation::Diffusion1d => SpatialOperator::laplacian_1d_isolated(m)?,
        Equation::Diffusion2d => SpatialOperator::laplacian_2d_periodic(m)?,
        Equation::AdvDiff2d => SpatialOperator::advection_diffusion_2d_periodic(m, d)?,
    })
}

/// Cell centres `(j + ½)/m` of the isolated 1D grid.
pub fn cell_centres(m: usize) -> Vec<f64> {
    (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect()
}

/// `sin(2πj/m)` with the zeros at `j = 0, m/2` exact.
fn sin_grid(j: usize, m: usize) -> f64 {
    if (2 * j) % m == 0 {
        0.0
    } else {
        (2.0 * PI * j as f64 / m as f64).sin()
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `exp(−100(x − ½)²)` on the 1D cell centres.
pub fn gaussian_bump(m: usize) -> Vec<f64> {
    cell_centres(m).iter().map(|x| (-100.0 * (x - 0.5).powi(2)).exp()).collect()
}

/// `sin(2πx₁)sin(2πx₂)` on the periodic grid `x = j/m`, row-major.
pub fn target_state_2d(m: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(m * m);
    for i1 in 0..m {
        for i2 in 0..m {
            v.push(sin_grid(i1, m) * sin_grid(i2, m));
        }
    }
    v
}

/// Rough initial state `(1 − T)/(12π²γ) · sign(sin 2πx₁) · sin²(2πx₂)`.
pub fn initial_state_2d(m: usize, horizon: f64, gamma: f64) -> Vec<f64> {
    let amp = (1.0 - horizon) / (K0 * gamma);
    let mut v = Vec::with_capacity(m * m);
    for i1 in 0..m {
        for i2 in 0..m {
            v.push(amp * sign(sin_grid(i1, m)) * sin_grid(i2, m).powi(2));
        }
    }
    v
}

/// Tracking target at times `t_l = lτ`, `l = 1..L−1`, stacked time-major.
pub fn tracking_target_2d(m: usize, steps: usize, horizon: f64, gamma: f64) -> Vec<f64> {
    let tau = horizon / steps as f64;
    let shape = target_state_2d(m);
    let mut out = Vec::with_capacity((steps - 1) * m * m);
    for l in 1..steps {
        let t = l as f64 * tau;
        let c = (K0 + 1.0 / (K0 * gamma)) * (t - horizon) - (1.0 + 1.0 / (K0 * K0 * gamma));
        out.extend(shape.iter().map(|s| c * s));
    }
    out
}

/// Assemble the control problem for `cfg` with `L` steps over horizon `T`.
pub fn build_problem(cfg: &RunConfig, steps: usize, horizon: f64) -> Result<ControlProblem> {
    let op = operator(cfg.equation, cfg.m, cfg.d)?;
    let m = cfg.m;
    let (y_init, data) = match (cfg.equation, cfg.objective) {
        (Equation::Diffusion1d, ObjectiveKind::Tracking) => {
            let bump = gaussian_bump(m);
            let y_d: Vec<f64> = (1..steps).flat_map(|_| bump.iter().copied()).collect();
            (bump, y_d)
        }
        (Equation::Diffusion1d, ObjectiveKind::Terminal) => (gaussian_bump(m), gaussian_bump(m)),
        (_, ObjectiveKind::Tracking) => (
            initial_state_2d(m, horizon, cfg.gamma),
            tracking_target_2d(m, steps, horizon, cfg.gamma),
        ),
        (_, ObjectiveKind::Terminal) => (initial_state_2d(m, horizon, cfg.gamma), target_state_2d(m)),
    };
    Ok(match cfg.objective {
        ObjectiveKind::Tracking => ControlProblem::tracking(op, cfg.gamma, horizon, steps, y_init, data)?,
        ObjectiveKind::Terminal => ControlProblem::terminal(op, cfg.gamma, horizon, steps, y_init, data)?,
    })
}
