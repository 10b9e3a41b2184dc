//! The coupled state/adjoint system over all time steps, matrix-free.
//!
//! Stacked vectors are time-major: entry `l·M + i` is spatial index `i` at time
//! index `l`. Both stacks are concatenated as `[state; adjoint]` when a flat
//! vector is needed (GMRES works on the flat form).
//!
//! Tracking works with the rescaled adjoint `λ̂ = λ/√γ`, which makes the
//! off-diagonal coupling blocks `±(τ/√γ)I` skew. Only implicit Euler is provided.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::Scalar;
use crate::spatial::SpatialOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    ImplicitEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Tracking,
    Terminal,
}

#[derive(Debug, Clone)]
pub enum Objective {
    /// `y_d(t = lτ)` for `l = 1..L−1`, stacked time-major.
    Tracking { y_d: Vec<f64> },
    Terminal { y_target: Vec<f64> },
}

impl Objective {
    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Objective::Tracking { .. } => ObjectiveKind::Tracking,
            Objective::Terminal { .. } => ObjectiveKind::Terminal,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    objective: Objective,
    op: SpatialOperator,
    gamma: f64,
    horizon: f64,
    steps: usize,
    y_init: Vec<f64>,
    scheme: TimeScheme,
}

impl ControlProblem {
    pub fn new(
        objective: Objective,
        op: SpatialOperator,
        gamma: f64,
        horizon: f64,
        steps: usize,
        y_init: Vec<f64>,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter("gamma must be positive"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter("horizon T must be positive"));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter("need at least L = 2 time steps"));
        }
        let m = op.order();
        if y_init.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: y_init.len(),
            });
        }
        match &objective {
            Objective::Tracking { y_d } => {
                if y_d.is_empty() {
                    return Err(Error::MissingData("tracking trajectory y_d"));
                }
                if y_d.len() != (steps - 1) * m {
                    return Err(Error::DimensionMismatch {
                        expected: (steps - 1) * m,
                        found: y_d.len(),
                    });
                }
            }
            Objective::Terminal { y_target } => {
                if y_target.is_empty() {
                    return Err(Error::MissingData("terminal target y_target"));
                }
                if y_target.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: y_target.len(),
                    });
                }
            }
        }
        let finite = y_init.iter().all(|x| x.is_finite())
            && match &objective {
                Objective::Tracking { y_d } => y_d.iter().all(|x| x.is_finite()),
                Objective::Terminal { y_target } => y_target.iter().all(|x| x.is_finite()),
            };
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            objective,
            op,
            gamma,
            horizon,
            steps,
            y_init,
            scheme: TimeScheme::ImplicitEuler,
        })
    }

    pub fn tracking(
        op: SpatialOperator,
        gamma: f64,
        horizon: f64,
        steps: usize,
        y_init: Vec<f64>,
        y_d: Vec<f64>,
    ) -> Result<Self> {
        Self::new(Objective::Tracking { y_d }, op, gamma, horizon, steps, y_init)
    }

    pub fn terminal(
        op: SpatialOperator,
        gamma: f64,
        horizon: f64,
        steps: usize,
        y_init: Vec<f64>,
        y_target: Vec<f64>,
    ) -> Result<Self> {
        Self::new(Objective::Terminal { y_target }, op, gamma, horizon, steps, y_init)
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.objective.kind()
    }

    pub fn operator(&self) -> &SpatialOperator {
        &self.op
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn scheme(&self) -> TimeScheme {
        self.scheme
    }

    pub fn y_init(&self) -> &[f64] {
        &self.y_init
    }

    pub fn spatial_order(&self) -> usize {
        self.op.order()
    }

    /// Number of time blocks per stack: `L − 1` for tracking, `L` for terminal.
    pub fn time_blocks(&self) -> usize {
        match self.kind() {
            ObjectiveKind::Tracking => self.steps - 1,
            ObjectiveKind::Terminal => self.steps,
        }
    }

    pub fn stack_len(&self) -> usize {
        self.time_blocks() * self.op.order()
    }

    /// Length of the flat `[state; adjoint]` vector.
    pub fn system_len(&self) -> usize {
        2 * self.stack_len()
    }

    /// Coupling in the state equation: `τ/√γ` (tracking, rescaled) or `τ/γ` (terminal).
    pub fn coupling(&self) -> f64 {
        match self.kind() {
            ObjectiveKind::Tracking => self.tau() / libm::sqrt(self.gamma),
            ObjectiveKind::Terminal => self.tau() / self.gamma,
        }
    }

    /// Flat right-hand side of the system the solver actually works on.
    pub fn rhs(&self) -> Vec<f64> {
        let (a, b) = match self.kind() {
            ObjectiveKind::Tracking => assemble_tracking_rhs(self).expect("objective checked"),
            ObjectiveKind::Terminal => {
                let s = assemble_terminal_rhs(self).expect("objective checked");
                (s.state, s.adjoint)
            }
        };
        let mut out = a;
        out.extend(b);
        out
    }

    /// Matrix-free product with the (rescaled tracking or terminal) system on a flat vector.
    pub fn matvec<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.system_len() {
            return Err(Error::DimensionMismatch {
                expected: self.system_len(),
                found: x.len(),
            });
        }
        let (y, lam) = x.split_at(self.stack_len());
        let (mut a, b) = match self.kind() {
            ObjectiveKind::Tracking => tracking_product(self, y, lam)?,
            ObjectiveKind::Terminal => terminal_product(self, y, lam)?,
        };
        a.extend(b);
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedState<T = f64> {
    pub state: Vec<T>,
    pub adjoint: Vec<T>,
    /// `true` when `adjoint` holds `λ̂ = λ/√γ`
    pub rescaled: bool,
}

impl<T: Scalar> StackedState<T> {
    pub fn zeros(p: &ControlProblem) -> Self {
        let n = p.stack_len();
        Self {
            state: vec![T::zero(); n],
            adjoint: vec![T::zero(); n],
            rescaled: p.kind() == ObjectiveKind::Tracking,
        }
    }

    /// Split a flat `[state; adjoint]` vector.
    pub fn from_flat(flat: &[T], rescaled: bool) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: flat.len() + 1,
                found: flat.len(),
            });
        }
        let (a, b) = flat.split_at(flat.len() / 2);
        Ok(Self {
            state: a.to_vec(),
            adjoint: b.to_vec(),
            rescaled,
        })
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut out = self.state.clone();
        out.extend_from_slice(&self.adjoint);
        out
    }
}

/// `(b̄₁, b̂₂)`: `b̄₁ = [y_init; 0; …]`, `b̂₂ = −τ ȳ_d / √γ`.
pub fn assemble_tracking_rhs(p: &ControlProblem) -> Result<(Vec<f64>, Vec<f64>)> {
    let Objective::Tracking { y_d } = &p.objective else {
        return Err(Error::MissingData("tracking trajectory y_d"));
    };
    let mut b1 = vec![0.0; p.stack_len()];
    b1[..p.spatial_order()].copy_from_slice(&p.y_init);
    let k = -p.tau() / libm::sqrt(p.gamma);
    let b2 = y_d.iter().map(|v| k * v).collect();
    Ok((b1, b2))
}

/// `[y_init; 0; … | 0; …; −(I + τK*) y_target]`.
pub fn assemble_terminal_rhs(p: &ControlProblem) -> Result<StackedState> {
    let Objective::Terminal { y_target } = &p.objective else {
        return Err(Error::MissingData("terminal target y_target"));
    };
    let n = p.stack_len();
    let m = p.spatial_order();
    let mut state = vec![0.0; n];
    state[..m].copy_from_slice(&p.y_init);
    let mut adjoint = vec![0.0; n];
    let ky = p.op.apply(y_target, true)?;
    let tau = p.tau();
    for ((a, &y), &k) in adjoint[n - m..].iter_mut().zip(y_target).zip(&ky) {
        *a = -(y + tau * k);
    }
    Ok(StackedState {
        state,
        adjoint,
        rescaled: false,
    })
}

fn check_stacks<T>(p: &ControlProblem, y: &[T], lam: &[T]) -> Result<()> {
    for len in [y.len(), lam.len()] {
        if len != p.stack_len() {
            return Err(Error::DimensionMismatch {
                expected: p.stack_len(),
                found: len,
            });
        }
    }
    Ok(())
}

/// `(B⊗I + τI⊗K) y`: lower-bidiagonal time coupling.
fn forward_block<T: Scalar>(p: &ControlProblem, y: &[T]) -> Result<Vec<T>> {
    let m = p.spatial_order();
    let tau = p.tau();
    let mut out = Vec::with_capacity(y.len());
    for (l, yl) in y.chunks_exact(m).enumerate() {
        let ky = p.op.apply_scalar(yl, false)?;
        for i in 0..m {
            let mut v = yl[i] + ky[i].scale(tau);
            if l > 0 {
                v -= y[(l - 1) * m + i];
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// `(Bᵀ⊗I + τI⊗K*) λ`: upper-bidiagonal time coupling.
fn backward_block<T: Scalar>(p: &ControlProblem, lam: &[T]) -> Result<Vec<T>> {
    let m = p.spatial_order();
    let n = lam.len() / m;
    let tau = p.tau();
    let mut out = Vec::with_capacity(lam.len());
    for (l, ll) in lam.chunks_exact(m).enumerate() {
        let kl = p.op.apply_scalar(ll, true)?;
        for i in 0..m {
            let mut v = ll[i] + kl[i].scale(tau);
            if l + 1 < n {
                v -= lam[(l + 1) * m + i];
            }
            out.push(v);
        }
    }
    Ok(out)
}

fn tracking_product<T: Scalar>(p: &ControlProblem, y: &[T], lam: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    check_stacks(p, y, lam)?;
    let g = p.coupling();
    let mut a = forward_block(p, y)?;
    let mut b = backward_block(p, lam)?;
    for (o, &l) in a.iter_mut().zip(lam) {
        *o += l.scale(g);
    }
    for (o, &s) in b.iter_mut().zip(y) {
        *o -= s.scale(g);
    }
    Ok((a, b))
}

fn terminal_product<T: Scalar>(p: &ControlProblem, y: &[T], lam: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    check_stacks(p, y, lam)?;
    let m = p.spatial_order();
    let n = y.len();
    let g = p.coupling();
    let mut a = forward_block(p, y)?;
    let mut b = backward_block(p, lam)?;
    for (o, &l) in a.iter_mut().zip(lam) {
        *o += l.scale(g);
    }
    // only the last adjoint equation sees the state: −(I + τK*) y_L
    let y_last = &y[n - m..];
    let ky = p.op.apply_scalar(y_last, true)?;
    let tau = p.tau();
    for ((o, &s), &k) in b[n - m..].iter_mut().zip(y_last).zip(&ky) {
        *o -= s + k.scale(tau);
    }
    Ok((a, b))
}

/// Product with the rescaled tracking system on `(ȳ, λ̂)`.
pub fn apply_tracking_operator<T: Scalar>(p: &ControlProblem, x: &StackedState<T>) -> Result<StackedState<T>> {
    if p.kind() != ObjectiveKind::Tracking {
        return Err(Error::InvalidParameter("tracking operator needs a tracking problem"));
    }
    if !x.rescaled {
        return Err(Error::InvalidParameter("tracking operator acts on the rescaled adjoint"));
    }
    let (state, adjoint) = tracking_product(p, &x.state, &x.adjoint)?;
    Ok(StackedState {
        state,
        adjoint,
        rescaled: true,
    })
}

/// Product with the terminal-cost system.
pub fn apply_terminal_operator<T: Scalar>(p: &ControlProblem, x: &StackedState<T>) -> Result<StackedState<T>> {
    if p.kind() != ObjectiveKind::Terminal {
        return Err(Error::InvalidParameter("terminal operator needs a terminal problem"));
    }
    let (state, adjoint) = terminal_product(p, &x.state, &x.adjoint)?;
    Ok(StackedState {
        state,
        adjoint,
        rescaled: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rescale {
    /// `λ → λ/√γ`
    ToScaled,
    /// `λ̂ → √γ λ̂`
    FromScaled,
}

pub fn rescale_adjoint<T: Scalar>(
    p: &ControlProblem,
    x: &StackedState<T>,
    direction: Rescale,
) -> Result<StackedState<T>> {
    if p.kind() != ObjectiveKind::Tracking {
        return Err(Error::InvalidParameter("adjoint rescaling applies to tracking only"));
    }
    let want_scaled = direction == Rescale::FromScaled;
    if x.rescaled != want_scaled {
        return Err(Error::InvalidParameter("adjoint already in the requested scaling"));
    }
    let s = libm::sqrt(p.gamma);
    let k = if want_scaled { s } else { 1.0 / s };
    Ok(StackedState {
        state: x.state.clone(),
        adjoint: x.adjoint.iter().map(|v| v.scale(k)).collect(),
        rescaled: !x.rescaled,
    })
}

/// `ū = −λ̄/γ` (unrescaled adjoint).
pub fn reconstruct_control<T: Scalar>(adjoint: &[T], gamma: f64) -> Vec<T> {
    let g = T::from_f64(gamma);
    adjoint.iter().map(|&v| -v / g).collect()
}
