//! Alpha-circulant ParaDiag preconditioners.
//!
//! `C(α)` (the time-difference matrix with `−α` in the top-right corner) factors
//! as `Γ_α⁻¹ F* D(α) F Γ_α`, where `F` is the unitary Fourier matrix with positive
//! exponent and `Γ_α = diag(α^{k/n})`. With the crate's DFT convention a solve
//! with `C(α)⊗I + τI⊗K` becomes
//!
//! ```text
//!   x = Γ⁻¹ · forward( (d_l + τK)⁻¹ · inverse(Γ v) )
//! ```
//!
//! (the `√n` factors of `F` and `F*` cancel). Between the two transforms every
//! time frequency `l` is an independent spatial solve.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::allatonce::{ControlProblem, ObjectiveKind};
use crate::error::{Error, Result};
use crate::numkit::{imag_ratio, DftPlan, Direction, Scalar};
use crate::spatial::{CoupledSolver, ShiftedSolveRequest, ShiftedSolver};

/// Tolerance on `|α| = 1` for the tracking preconditioner.
pub const UNIT_MODULUS_TOL: f64 = 1e-14;
/// Allowed relative imaginary residue when a real preconditioner output is truncated.
pub const REAL_OUTPUT_TOL: f64 = 1e-9;
pub const DEFAULT_TRACKING_ALPHA: f64 = -1.0;
pub const DEFAULT_TERMINAL_ALPHA: f64 = 1e-4;

/// Scaling weights and eigenvalues of `C(α)` of order `n`.
#[derive(Debug, Clone)]
pub struct AlphaCirculantSpec {
    alpha: Complex64,
    n: usize,
    weights: Vec<Complex64>,
    eigs: Vec<Complex64>,
}

impl AlphaCirculantSpec {
    /// Principal branch: `α^{k/n} = |α|^{k/n} e^{i k arg(α)/n}`.
    pub fn new(alpha: Complex64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if alpha.norm() == 0.0 {
            return Err(Error::InvalidParameter("alpha must be non-zero"));
        }
        if !alpha.is_finite() {
            return Err(Error::NonFinite);
        }
        let (r, theta) = alpha.to_polar();
        let nf = n as f64;
        let weights: Vec<Complex64> = (0..n)
            .map(|k| {
                let e = k as f64 / nf;
                Complex64::from_polar(libm::pow(r, e), theta * e)
            })
            .collect();
        let root = Complex64::from_polar(libm::pow(r, 1.0 / nf), theta / nf);
        let eigs = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / nf;
                Complex64::new(1.0, 0.0) - root * Complex64::new(libm::cos(a), libm::sin(a))
            })
            .collect();
        Ok(Self {
            alpha,
            n,
            weights,
            eigs,
        })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Diagonal of `Γ_α`.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Diagonal of `D(α)`.
    pub fn eigs(&self) -> &[Complex64] {
        &self.eigs
    }

    pub fn is_unit_modulus(&self) -> bool {
        (self.alpha.norm() - 1.0).abs() <= UNIT_MODULUS_TOL
    }
}

fn scale_rows(data: &mut [Complex64], width: usize, w: impl Fn(usize) -> Complex64) {
    for (l, row) in data.chunks_exact_mut(width).enumerate() {
        let s = w(l);
        for x in row {
            *x *= s;
        }
    }
}

fn to_complex<T: Scalar>(v: &[T]) -> Vec<Complex64> {
    v.iter().map(|x| x.to_c64()).collect()
}

/// Convert back to `T`; real targets require a negligible imaginary part.
fn from_complex<T: Scalar>(v: Vec<Complex64>) -> Result<Vec<T>> {
    if !T::IS_COMPLEX && imag_ratio(&v) > REAL_OUTPUT_TOL {
        return Err(Error::InvalidParameter(
            "preconditioner output is not real; use complex arithmetic for this alpha",
        ));
    }
    Ok(v.into_iter().map(T::from_c64).collect())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn for_each_block<S: Sync>(
    data: &mut [Complex64],
    width: usize,
    solvers: &[S],
    f: impl Fn(&S, &mut [Complex64]) -> Result<()> + Sync + Send,
) -> Result<()> {
    use rayon::prelude::*;
    data.par_chunks_mut(width)
        .zip(solvers.par_iter())
        .try_for_each(|(block, s)| f(s, block))
}

#[cfg(not(feature = "parallel"))]
fn for_each_block<S>(
    data: &mut [Complex64],
    width: usize,
    solvers: &[S],
    f: impl Fn(&S, &mut [Complex64]) -> Result<()>,
) -> Result<()> {
    data.chunks_mut(width)
        .zip(solvers)
        .try_for_each(|(block, s)| f(s, block))
}

/// `P(α)⁻¹` for the rescaled tracking system; needs `|α| = 1`.
#[derive(Debug, Clone)]
pub struct TrackingPreconditioner {
    spec: AlphaCirculantSpec,
    plan: DftPlan,
    blocks: Vec<CoupledSolver>,
    m: usize,
}

impl TrackingPreconditioner {
    pub fn new(p: &ControlProblem, alpha: Complex64) -> Result<Self> {
        if p.kind() != ObjectiveKind::Tracking {
            return Err(Error::InvalidParameter("tracking preconditioner needs a tracking problem"));
        }
        let n = p.time_blocks();
        let spec = AlphaCirculantSpec::new(alpha, n)?;
        if !spec.is_unit_modulus() {
            return Err(Error::InvalidParameter("tracking preconditioner requires |alpha| = 1"));
        }
        let tau = p.tau();
        let g = p.coupling();
        let blocks = spec
            .eigs()
            .iter()
            .enumerate()
            .map(|(index, &d)| {
                p.operator()
                    .coupled_solver(d, tau, g)
                    .map_err(|_| Error::SingularBlock { index })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            plan: DftPlan::new(n)?,
            spec,
            blocks,
            m: p.spatial_order(),
        })
    }

    pub fn spec(&self) -> &AlphaCirculantSpec {
        &self.spec
    }

    /// `(x̄, z̄) = P(α)⁻¹ (v̄, w̄)` in complex arithmetic.
    pub fn apply_complex(&self, v: &[Complex64], w: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let len = self.spec.len() * self.m;
        check_len(len, v.len())?;
        check_len(len, w.len())?;
        let gamma = self.spec.weights();
        let mut r = v.to_vec();
        let mut s = w.to_vec();
        for buf in [&mut r, &mut s] {
            scale_rows(buf, self.m, |l| gamma[l]);
            self.plan.process_columns(buf, self.m, Direction::Inverse);
        }
        // pair up the per-index blocks of both stacks
        let mut joined: Vec<Complex64> = Vec::with_capacity(2 * len);
        for (rb, sb) in r.chunks_exact(self.m).zip(s.chunks_exact(self.m)) {
            joined.extend_from_slice(rb);
            joined.extend_from_slice(sb);
        }
        let m = self.m;
        for_each_block(&mut joined, 2 * m, &self.blocks, |solver, block| {
            let (a, b) = block.split_at_mut(m);
            solver.solve_in_place(a, b)
        })?;
        for (l, blk) in joined.chunks_exact(2 * m).enumerate() {
            r[l * m..(l + 1) * m].copy_from_slice(&blk[..m]);
            s[l * m..(l + 1) * m].copy_from_slice(&blk[m..]);
        }
        for buf in [&mut r, &mut s] {
            self.plan.process_columns(buf, self.m, Direction::Forward);
            scale_rows(buf, self.m, |l| gamma[l].inv());
        }
        Ok((r, s))
    }

    pub fn apply<T: Scalar>(&self, v: &[T], w: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (x, z) = self.apply_complex(&to_complex(v), &to_complex(w))?;
        Ok((from_complex(x)?, from_complex(z)?))
    }

    /// Flat `[v; w] → [x; z]`.
    pub fn apply_flat<T: Scalar>(&self, vw: &[T]) -> Result<Vec<T>> {
        check_len(2 * self.spec.len() * self.m, vw.len())?;
        let (v, w) = vw.split_at(vw.len() / 2);
        let (mut x, z) = self.apply(v, w)?;
        x.extend(z);
        Ok(x)
    }
}

/// Block-triangular `P(α)⁻¹` for the terminal-cost system; needs `α ≠ 0`.
#[derive(Debug, Clone)]
pub struct TerminalPreconditioner {
    spec: AlphaCirculantSpec,
    plan: DftPlan,
    forward: Vec<ShiftedSolver>,
    backward: Vec<ShiftedSolver>,
    coupling: f64,
    m: usize,
}

impl TerminalPreconditioner {
    pub fn new(p: &ControlProblem, alpha: Complex64) -> Result<Self> {
        if p.kind() != ObjectiveKind::Terminal {
            return Err(Error::InvalidParameter("terminal preconditioner needs a terminal problem"));
        }
        let n = p.time_blocks();
        let spec = AlphaCirculantSpec::new(alpha, n)?;
        let tau = p.tau();
        let op = p.operator();
        let mut forward = Vec::with_capacity(n);
        let mut backward = Vec::with_capacity(n);
        for (index, &d) in spec.eigs().iter().enumerate() {
            let fail = |_| Error::SingularBlock { index };
            forward.push(op.shifted_solver(ShiftedSolveRequest::new(d, tau, false)?).map_err(fail)?);
            backward.push(op.shifted_solver(ShiftedSolveRequest::new(d.conj(), tau, true)?).map_err(fail)?);
        }
        Ok(Self {
            plan: DftPlan::new(n)?,
            spec,
            forward,
            backward,
            coupling: p.coupling(),
            m: p.spatial_order(),
        })
    }

    pub fn spec(&self) -> &AlphaCirculantSpec {
        &self.spec
    }

    pub fn apply_complex(&self, v: &[Complex64], w: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let len = self.spec.len() * self.m;
        check_len(len, v.len())?;
        check_len(len, w.len())?;
        let gamma = self.spec.weights();
        let m = self.m;

        // phase 1: (C*(α)⊗I + τI⊗K*) z = w, with C* = Γ* F* D* F Γ^{-*}
        let mut z = w.to_vec();
        scale_rows(&mut z, m, |l| gamma[l].conj().inv());
        self.plan.process_columns(&mut z, m, Direction::Inverse);
        for_each_block(&mut z, m, &self.backward, |s, b| s.solve_in_place(b))?;
        self.plan.process_columns(&mut z, m, Direction::Forward);
        scale_rows(&mut z, m, |l| gamma[l].conj());

        // phase 2: (C(α)⊗I + τI⊗K) x = v − (τ/γ) z
        let mut x: Vec<Complex64> = v.iter().zip(&z).map(|(a, b)| a - b * self.coupling).collect();
        scale_rows(&mut x, m, |l| gamma[l]);
        self.plan.process_columns(&mut x, m, Direction::Inverse);
        for_each_block(&mut x, m, &self.forward, |s, b| s.solve_in_place(b))?;
        self.plan.process_columns(&mut x, m, Direction::Forward);
        scale_rows(&mut x, m, |l| gamma[l].inv());
        Ok((x, z))
    }

    pub fn apply<T: Scalar>(&self, v: &[T], w: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (x, z) = self.apply_complex(&to_complex(v), &to_complex(w))?;
        Ok((from_complex(x)?, from_complex(z)?))
    }

    pub fn apply_flat<T: Scalar>(&self, vw: &[T]) -> Result<Vec<T>> {
        check_len(2 * self.spec.len() * self.m, vw.len())?;
        let (v, w) = vw.split_at(vw.len() / 2);
        let (mut x, z) = self.apply(v, w)?;
        x.extend(z);
        Ok(x)
    }
}

/// Either preconditioner, picked from the problem's objective.
#[derive(Debug, Clone)]
pub enum Preconditioner {
    Tracking(TrackingPreconditioner),
    Terminal(TerminalPreconditioner),
}

impl Preconditioner {
    pub fn new(p: &ControlProblem, alpha: Complex64) -> Result<Self> {
        Ok(match p.kind() {
            ObjectiveKind::Tracking => Self::Tracking(TrackingPreconditioner::new(p, alpha)?),
            ObjectiveKind::Terminal => Self::Terminal(TerminalPreconditioner::new(p, alpha)?),
        })
    }

    pub fn spec(&self) -> &AlphaCirculantSpec {
        match self {
            Self::Tracking(t) => t.spec(),
            Self::Terminal(t) => t.spec(),
        }
    }

    pub fn apply_flat<T: Scalar>(&self, vw: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Tracking(t) => t.apply_flat(vw),
            Self::Terminal(t) => t.apply_flat(vw),
        }
    }

    /// Whether real inputs map to real outputs (`α` real).
    pub fn preserves_reals(&self) -> bool {
        self.spec().alpha().im == 0.0
    }
}
