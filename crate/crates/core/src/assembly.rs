//! Dense Kronecker assemblies of the all-at-once systems and their
//! preconditioners. Only meant for small sizes: reference solves and tests.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::allatonce::{ControlProblem, Objective, ObjectiveKind};
use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;

type CMat = DenseMatrix<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Implicit-Euler difference matrix: 1 on the diagonal, −1 below.
pub fn bidiagonal(n: usize) -> CMat {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(1.0)
        } else if i == j + 1 {
            c(-1.0)
        } else {
            c(0.0)
        }
    })
}

/// `C(α)`: the difference matrix with `−α` in the top-right corner.
pub fn alpha_circulant_difference(alpha: Complex64, n: usize) -> CMat {
    let mut m = bidiagonal(n);
    m[(0, n - 1)] -= alpha;
    m
}

fn corner(n: usize) -> CMat {
    let mut e = CMat::zeros(n, n);
    e[(n - 1, n - 1)] = c(1.0);
    e
}

struct Pieces {
    k: CMat,
    k_adj: CMat,
    id_m: CMat,
    id_n: CMat,
    tau: f64,
}

fn pieces(p: &ControlProblem) -> Pieces {
    let n = p.time_blocks();
    let m = p.spatial_order();
    Pieces {
        k: p.operator().to_dense(false),
        k_adj: p.operator().to_dense(true),
        id_m: CMat::identity(m),
        id_n: CMat::identity(n),
        tau: p.tau(),
    }
}

/// `T⊗I + τ I⊗K`
fn time_space(pc: &Pieces, time: &CMat, adjoint: bool) -> CMat {
    let k = if adjoint { &pc.k_adj } else { &pc.k };
    time.kron(&pc.id_m)
        .add(&pc.id_n.kron(k).scaled(c(pc.tau)))
        .expect("matching Kronecker shapes")
}

fn require(p: &ControlProblem, kind: ObjectiveKind) -> Result<()> {
    if p.kind() != kind {
        return Err(Error::InvalidParameter("dense assembly called for the wrong objective"));
    }
    Ok(())
}

/// Rescaled tracking system `Â` acting on `(ȳ, λ̂)`.
pub fn tracking_system(p: &ControlProblem) -> Result<CMat> {
    require(p, ObjectiveKind::Tracking)?;
    let pc = pieces(p);
    let b = bidiagonal(p.time_blocks());
    let g = p.coupling();
    let nm = p.stack_len();
    let id = CMat::identity(nm);
    DenseMatrix::block2(
        &time_space(&pc, &b, false),
        &id.scaled(c(g)),
        &id.scaled(c(-g)),
        &time_space(&pc, &b.transpose(), true),
    )
}

/// Tracking system before rescaling, on `(ȳ, λ̄)`, with its right-hand side.
pub fn tracking_system_unscaled(p: &ControlProblem) -> Result<(CMat, Vec<f64>)> {
    require(p, ObjectiveKind::Tracking)?;
    let Objective::Tracking { y_d } = p.objective() else {
        unreachable!()
    };
    let pc = pieces(p);
    let b = bidiagonal(p.time_blocks());
    let nm = p.stack_len();
    let id = CMat::identity(nm);
    let a = DenseMatrix::block2(
        &time_space(&pc, &b, false),
        &id.scaled(c(pc.tau / p.gamma())),
        &id.scaled(c(-pc.tau)),
        &time_space(&pc, &b.transpose(), true),
    )?;
    let mut rhs = alloc::vec![0.0; 2 * nm];
    rhs[..p.spatial_order()].copy_from_slice(p.y_init());
    for (r, y) in rhs[nm..].iter_mut().zip(y_d) {
        *r = -pc.tau * y;
    }
    Ok((a, rhs))
}

/// Terminal-cost system on `(ȳ, λ̄)`.
pub fn terminal_system(p: &ControlProblem) -> Result<CMat> {
    require(p, ObjectiveKind::Terminal)?;
    let pc = pieces(p);
    let n = p.time_blocks();
    let b = bidiagonal(n);
    let nm = p.stack_len();
    let id = CMat::identity(nm);
    let e = corner(n);
    let coupling = e
        .kron(&pc.id_m)
        .add(&e.kron(&pc.k_adj).scaled(c(pc.tau)))?
        .scaled(c(-1.0));
    DenseMatrix::block2(
        &time_space(&pc, &b, false),
        &id.scaled(c(p.coupling())),
        &coupling,
        &time_space(&pc, &b.transpose(), true),
    )
}

/// `P(α)` for the rescaled tracking system.
pub fn tracking_preconditioner(p: &ControlProblem, alpha: Complex64) -> Result<CMat> {
    require(p, ObjectiveKind::Tracking)?;
    let pc = pieces(p);
    let cm = alpha_circulant_difference(alpha, p.time_blocks());
    let g = p.coupling();
    let id = CMat::identity(p.stack_len());
    DenseMatrix::block2(
        &time_space(&pc, &cm, false),
        &id.scaled(c(g)),
        &id.scaled(c(-g)),
        &time_space(&pc, &cm.adjoint(), true),
    )
}

/// Block upper-triangular `P(α)` for the terminal-cost system.
pub fn terminal_preconditioner(p: &ControlProblem, alpha: Complex64) -> Result<CMat> {
    require(p, ObjectiveKind::Terminal)?;
    let pc = pieces(p);
    let cm = alpha_circulant_difference(alpha, p.time_blocks());
    let nm = p.stack_len();
    DenseMatrix::block2(
        &time_space(&pc, &cm, false),
        &CMat::identity(nm).scaled(c(p.coupling())),
        &CMat::zeros(nm, nm),
        &time_space(&pc, &cm.adjoint(), true),
    )
}

/// Dense system matching [`ControlProblem::matvec`].
pub fn system(p: &ControlProblem) -> Result<CMat> {
    match p.kind() {
        ObjectiveKind::Tracking => tracking_system(p),
        ObjectiveKind::Terminal => terminal_system(p),
    }
}

/// Dense preconditioner matching the objective.
pub fn preconditioner(p: &ControlProblem, alpha: Complex64) -> Result<CMat> {
    match p.kind() {
        ObjectiveKind::Tracking => tracking_preconditioner(p, alpha),
        ObjectiveKind::Terminal => terminal_preconditioner(p, alpha),
    }
}
