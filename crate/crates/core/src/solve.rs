//! End-to-end solve: build the preconditioner, run GMRES, undo the rescaling.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::allatonce::{reconstruct_control, rescale_adjoint, ControlProblem, ObjectiveKind, Rescale, StackedState};
use crate::error::Result;
use crate::krylov::{gmres, relative_residual, GmresConfig, KrylovOutcome};
use crate::precond::Preconditioner;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// State at the unknown time indices (`l = 1..L−1` tracking, `1..L` terminal).
    pub state: Vec<f64>,
    /// Unrescaled adjoint `λ̄`.
    pub adjoint: Vec<f64>,
    /// `ū = −λ̄/γ`
    pub control: Vec<f64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// `‖b − A x‖/‖b‖` of the system GMRES worked on.
    pub true_relres: f64,
}

impl Solution {
    pub fn final_relres_precond(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// Solve `p` with the alpha-circulant preconditioner for `alpha`.
///
/// Real `alpha` keeps the outer iteration in real arithmetic; otherwise GMRES
/// runs in complex arithmetic and the real part of the iterate is returned.
pub fn solve(p: &ControlProblem, alpha: Complex64, cfg: GmresConfig) -> Result<Solution> {
    let pre = Preconditioner::new(p, alpha)?;
    let b = p.rhs();
    let (x, outcome): (Vec<f64>, KrylovOutcome<()>) = if pre.preserves_reals() {
        let out = gmres(|v: &[f64]| p.matvec(v), |v: &[f64]| pre.apply_flat(v), &b, cfg)?;
        (out.solution, strip(out.iterations, out.residual_history, out.converged))
    } else {
        let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let out = gmres(
            |v: &[Complex64]| p.matvec(v),
            |v: &[Complex64]| pre.apply_flat(v),
            &bc,
            cfg,
        )?;
        (
            out.solution.iter().map(|z| z.re).collect(),
            strip(out.iterations, out.residual_history, out.converged),
        )
    };
    let true_relres = relative_residual(|v: &[f64]| p.matvec(v), &b, &x)?;

    let tracking = p.kind() == ObjectiveKind::Tracking;
    let mut stacked = StackedState::from_flat(&x, tracking)?;
    if tracking {
        stacked = rescale_adjoint(p, &stacked, Rescale::FromScaled)?;
    }
    let control = reconstruct_control(&stacked.adjoint, p.gamma());
    Ok(Solution {
        state: stacked.state,
        adjoint: stacked.adjoint,
        control,
        iterations: outcome.iterations,
        residual_history: outcome.residual_history,
        converged: outcome.converged,
        true_relres,
    })
}

fn strip(iterations: usize, residual_history: Vec<f64>, converged: bool) -> KrylovOutcome<()> {
    KrylovOutcome {
        solution: Vec::new(),
        iterations,
        residual_history,
        converged,
    }
}
