//! Spatial operators `K` (with `y' = −Ky + u`) and the shifted solves the
//! preconditioners need.
//!
//! Two storage variants exist. `Dense` keeps the real `M × M` matrix and solves
//! through LU. `Spectral` describes a periodic constant-coefficient stencil on an
//! `m₁ × m₂` grid by its symbol under the 2D DFT; products and solves become
//! pointwise in Fourier space. Grid vectors are row-major, index `i₁·m₂ + i₂`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{imag_ratio, lu_factor, Dft2Plan, DenseMatrix, LuFactors, Scalar};

/// Symmetry / realness tolerance for the self-adjoint flag.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;
/// Allowed relative imaginary residue when a real operator runs through complex arithmetic.
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum OperatorKind {
    Dense(DenseMatrix<f64>),
    Spectral {
        rows: usize,
        cols: usize,
        symbol: Vec<Complex64>,
        plan: Dft2Plan,
    },
}

#[derive(Debug, Clone)]
pub struct SpatialOperator {
    order: usize,
    kind: OperatorKind,
    self_adjoint: bool,
    /// Closed-form eigenvalues when known and real (self-adjoint builders only).
    spectrum: Option<Vec<f64>>,
}

/// A shift `ζ`, step `τ` and side for `(ζI + τK)` or `(ζI + τK*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedSolveRequest {
    pub shift: Complex64,
    pub tau: f64,
    pub adjoint: bool,
}

impl ShiftedSolveRequest {
    pub fn new(shift: Complex64, tau: f64, adjoint: bool) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        Ok(Self {
            shift,
            tau,
            adjoint,
        })
    }
}

fn laplacian_symbol(p: usize, q: usize, m: usize, dx: f64) -> f64 {
    let (tp, tq) = (2.0 * PI * p as f64 / m as f64, 2.0 * PI * q as f64 / m as f64);
    (4.0 - 2.0 * libm::cos(tp) - 2.0 * libm::cos(tq)) / (dx * dx)
}

impl SpatialOperator {
    /// Wrap a real dense matrix; the self-adjoint flag is detected.
    pub fn from_dense(matrix: DenseMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        if !matrix.all_finite() {
            return Err(Error::NonFinite);
        }
        let n = matrix.rows();
        let scale = matrix.max_abs().max(f64::MIN_POSITIVE);
        let symmetric = (0..n).all(|i| {
            (0..i).all(|j| (matrix[(i, j)] - matrix[(j, i)]).abs() <= SELF_ADJOINT_TOL * scale)
        });
        Ok(Self {
            order: n,
            kind: OperatorKind::Dense(matrix),
            self_adjoint: symmetric,
            spectrum: None,
        })
    }

    /// The `1 × 1` operator `K = σ`.
    pub fn scalar(sigma: f64) -> Result<Self> {
        let mut op = Self::from_dense(DenseMatrix::from_row_major(1, 1, vec![sigma])?)?;
        op.spectrum = Some(vec![sigma]);
        Ok(op)
    }

    /// Dense operator with user-supplied eigenvalues (for spectrum reports).
    pub fn with_spectrum(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: sigma.len(),
            });
        }
        self.spectrum = Some(sigma);
        Ok(self)
    }

    /// Periodic stencil given by its 2D-DFT symbol, row-major over `(p, q)`.
    pub fn from_symbol(rows: usize, cols: usize, symbol: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if symbol.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: symbol.len(),
            });
        }
        if !symbol.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = symbol.iter().fold(0.0f64, |m, s| m.max(s.norm())).max(f64::MIN_POSITIVE);
        let self_adjoint = symbol.iter().all(|s| s.im.abs() <= SELF_ADJOINT_TOL * scale);
        let spectrum = self_adjoint.then(|| symbol.iter().map(|s| s.re).collect());
        Ok(Self {
            order: rows * cols,
            kind: OperatorKind::Spectral {
                rows,
                cols,
                plan: Dft2Plan::new(rows, cols)?,
                symbol,
            },
            self_adjoint,
            spectrum,
        })
    }

    /// 1D Laplacian on `[0, 1]` with isolated (no-flux) ends, `Δx = 1/M`:
    /// `(1/Δx²)·tridiag(−1, 2, −1)` with both corner diagonals equal to `1/Δx²`.
    pub fn laplacian_1d_isolated(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("1D Laplacian needs M >= 2"));
        }
        let inv_dx2 = (m * m) as f64;
        let mat = DenseMatrix::from_fn(m, m, |i, j| {
            if i == j {
                if i == 0 || i == m - 1 {
                    inv_dx2
                } else {
                    2.0 * inv_dx2
                }
            } else if i.abs_diff(j) == 1 {
                -inv_dx2
            } else {
                0.0
            }
        });
        let mut op = Self::from_dense(mat)?;
        // discrete cosine eigenbasis
        op.spectrum = Some(
            (0..m)
                .map(|k| 2.0 * (1.0 - libm::cos(k as f64 * PI / m as f64)) * inv_dx2)
                .collect(),
        );
        Ok(op)
    }

    /// Negative 5-point Laplacian on the periodic unit square, `m × m` grid.
    pub fn laplacian_2d_periodic(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("2D grid side must be >= 2"));
        }
        let dx = 1.0 / m as f64;
        let symbol = (0..m * m)
            .map(|idx| Complex64::new(laplacian_symbol(idx / m, idx % m, m, dx), 0.0))
            .collect();
        Self::from_symbol(m, m, symbol)
    }

    /// `K = −dΔ + ∂₁ + ∂₂` with central differences on the periodic unit square.
    pub fn advection_diffusion_2d_periodic(m: usize, d: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("2D grid side must be >= 2"));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter("diffusion coefficient must be positive"));
        }
        let dx = 1.0 / m as f64;
        let symbol = (0..m * m)
            .map(|idx| {
                let (p, q) = (idx / m, idx % m);
                let adv = libm::sin(2.0 * PI * p as f64 / m as f64)
                    + libm::sin(2.0 * PI * q as f64 / m as f64);
                Complex64::new(d * laplacian_symbol(p, q, m, dx), adv / dx)
            })
            .collect();
        // m = 2 is the one grid where the central advection symbol vanishes
        Self::from_symbol(m, m, symbol)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// Known real spectrum (closed form or user supplied).
    pub fn spectrum(&self) -> Option<&[f64]> {
        self.spectrum.as_deref()
    }

    pub fn symbol(&self) -> Option<&[Complex64]> {
        match &self.kind {
            OperatorKind::Spectral { symbol, .. } => Some(symbol),
            OperatorKind::Dense(_) => None,
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: len,
            });
        }
        Ok(())
    }

    /// `Kv` or `K*v` for complex input.
    pub fn apply_complex(&self, v: &[Complex64], adjoint: bool) -> Result<Vec<Complex64>> {
        self.check_len(v.len())?;
        Ok(match &self.kind {
            OperatorKind::Dense(k) => dense_apply(k, v, adjoint),
            OperatorKind::Spectral { symbol, plan, .. } => {
                let mut w = v.to_vec();
                plan.forward(&mut w);
                for (x, s) in w.iter_mut().zip(symbol) {
                    *x *= if adjoint { s.conj() } else { *s };
                }
                plan.inverse(&mut w);
                w
            }
        })
    }

    /// `Kv` or `K*v` in the field of `v`; real input stays real.
    pub fn apply_scalar<T: Scalar>(&self, v: &[T], adjoint: bool) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        match &self.kind {
            OperatorKind::Dense(k) => Ok(dense_apply(k, v, adjoint)),
            OperatorKind::Spectral { .. } => {
                let vc: Vec<Complex64> = v.iter().map(|x| x.to_c64()).collect();
                let out = self.apply_complex(&vc, adjoint)?;
                if !T::IS_COMPLEX {
                    debug_assert!(imag_ratio(&out) <= REALNESS_TOL, "real operator produced complex output");
                }
                Ok(out.into_iter().map(T::from_c64).collect())
            }
        }
    }

    pub fn apply(&self, v: &[f64], adjoint: bool) -> Result<Vec<f64>> {
        self.apply_scalar(v, adjoint)
    }

    /// Dense matrix of `K` (or `K*`) assembled column by column from `apply`.
    pub fn to_dense(&self, adjoint: bool) -> DenseMatrix<Complex64> {
        let n = self.order;
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.apply_complex(&e, adjoint).expect("length matches order");
            for (i, x) in col.into_iter().enumerate() {
                out[(i, j)] = x;
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Real dense matrix of `K`; imaginary round-off is dropped.
    pub fn to_dense_real(&self) -> DenseMatrix<f64> {
        match &self.kind {
            OperatorKind::Dense(k) => k.clone(),
            OperatorKind::Spectral { .. } => self.to_dense(false).map(|z| z.re),
        }
    }

    /// Prepare repeated solves with `ζI + τK` (or `ζI + τK*`).
    pub fn shifted_solver(&self, req: ShiftedSolveRequest) -> Result<ShiftedSolver> {
        if !(req.tau > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let inner = match &self.kind {
            OperatorKind::Dense(k) => {
                let n = self.order;
                let mat = DenseMatrix::from_fn(n, n, |i, j| {
                    let kij = if req.adjoint { k[(j, i)] } else { k[(i, j)] };
                    let mut z = Complex64::new(req.tau * kij, 0.0);
                    if i == j {
                        z += req.shift;
                    }
                    z
                });
                let lu = lu_factor(&mat)?;
                if lu.is_singular() {
                    let pivot = match lu.solve(&vec![Complex64::new(0.0, 0.0); n]) {
                        Err(Error::SingularMatrix { pivot }) => pivot,
                        _ => 0,
                    };
                    return Err(Error::SingularShift { mode: pivot });
                }
                ShiftedInner::Dense(lu)
            }
            OperatorKind::Spectral { symbol, plan, .. } => {
                let scale = symbol
                    .iter()
                    .fold(req.shift.norm(), |m, s| m.max(req.tau * s.norm()));
                let mut inv = Vec::with_capacity(symbol.len());
                for (mode, s) in symbol.iter().enumerate() {
                    let s = if req.adjoint { s.conj() } else { *s };
                    let den = req.shift + s * req.tau;
                    if den.norm() <= 1e-14 * scale || den.norm() == 0.0 {
                        return Err(Error::SingularShift { mode });
                    }
                    inv.push(den.inv());
                }
                ShiftedInner::Spectral {
                    inv,
                    plan: plan.clone(),
                }
            }
        };
        Ok(ShiftedSolver {
            order: self.order,
            inner,
        })
    }

    /// One-off `(ζI + τK)⁻¹ v`.
    pub fn shifted_solve(&self, req: ShiftedSolveRequest, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.shifted_solver(req)?.solve(v)
    }

    /// Prepare repeated solves with `[[ζI + τK, gI], [−gI, ζ̄I + τK*]]`.
    pub fn coupled_solver(&self, shift: Complex64, tau: f64, coupling: f64) -> Result<CoupledSolver> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let n = self.order;
        let inner = match &self.kind {
            OperatorKind::Dense(k) => {
                let mat = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
                    let (bi, bj) = (i / n, j / n);
                    let (ii, jj) = (i % n, j % n);
                    let diag = ii == jj;
                    match (bi, bj) {
                        (0, 0) => {
                            let mut z = Complex64::new(tau * k[(ii, jj)], 0.0);
                            if diag {
                                z += shift;
                            }
                            z
                        }
                        (1, 1) => {
                            let mut z = Complex64::new(tau * k[(jj, ii)], 0.0);
                            if diag {
                                z += shift.conj();
                            }
                            z
                        }
                        (0, 1) if diag => Complex64::new(coupling, 0.0),
                        (1, 0) if diag => Complex64::new(-coupling, 0.0),
                        _ => Complex64::new(0.0, 0.0),
                    }
                });
                let lu = lu_factor(&mat)?;
                if lu.is_singular() {
                    return Err(Error::SingularShift { mode: 0 });
                }
                CoupledInner::Dense(lu)
            }
            OperatorKind::Spectral { symbol, plan, .. } => {
                let g2 = coupling * coupling;
                let mut modes = Vec::with_capacity(symbol.len());
                for (mode, s) in symbol.iter().enumerate() {
                    let a = shift + s * tau;
                    let b = shift.conj() + s.conj() * tau;
                    let det = a * b + g2;
                    if det.norm() <= 1e-14 * (a.norm() * b.norm() + g2) || det.norm() == 0.0 {
                        return Err(Error::SingularShift { mode });
                    }
                    let inv = det.inv();
                    modes.push([a * inv, b * inv, inv * coupling]);
                }
                CoupledInner::Spectral {
                    modes,
                    plan: plan.clone(),
                }
            }
        };
        Ok(CoupledSolver { order: n, inner })
    }

    /// One-off coupled 2×2 block solve.
    pub fn coupled_block_solve(
        &self,
        shift: Complex64,
        tau: f64,
        coupling: f64,
        r: &[Complex64],
        s: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.coupled_solver(shift, tau, coupling)?.solve(r, s)
    }
}

fn dense_apply<T: Scalar>(k: &DenseMatrix<f64>, v: &[T], adjoint: bool) -> Vec<T> {
    let n = k.rows();
    let mut out = vec![T::zero(); n];
    if adjoint {
        for (j, &vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                let kji = k[(j, i)];
                if kji != 0.0 {
                    *o += vj.scale(kji);
                }
            }
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (&kij, &vj) in k.row(i).iter().zip(v) {
                if kij != 0.0 {
                    acc += vj.scale(kij);
                }
            }
            *o = acc;
        }
    }
    out
}

#[derive(Debug, Clone)]
enum ShiftedInner {
    Dense(LuFactors<Complex64>),
    Spectral { inv: Vec<Complex64>, plan: Dft2Plan },
}

/// Factored `ζI + τK` (or adjoint), reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    order: usize,
    inner: ShiftedInner,
}

impl ShiftedSolver {
    pub fn solve(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = v.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, v: &mut [Complex64]) -> Result<()> {
        if v.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: v.len(),
            });
        }
        match &self.inner {
            ShiftedInner::Dense(lu) => lu.solve_in_place(v),
            ShiftedInner::Spectral { inv, plan } => {
                plan.forward(v);
                for (x, d) in v.iter_mut().zip(inv) {
                    *x *= d;
                }
                plan.inverse(v);
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum CoupledInner {
    Dense(LuFactors<Complex64>),
    Spectral {
        /// per mode `[a/det, b/det, g/det]`
        modes: Vec<[Complex64; 3]>,
        plan: Dft2Plan,
    },
}

/// Factored `[[ζI + τK, gI], [−gI, ζ̄I + τK*]]`.
#[derive(Debug, Clone)]
pub struct CoupledSolver {
    order: usize,
    inner: CoupledInner,
}

impl CoupledSolver {
    pub fn solve(&self, r: &[Complex64], s: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut x = r.to_vec();
        let mut z = s.to_vec();
        self.solve_in_place(&mut x, &mut z)?;
        Ok((x, z))
    }

    /// Overwrites `(r, s)` with the solution `(x, z)`.
    pub fn solve_in_place(&self, r: &mut [Complex64], s: &mut [Complex64]) -> Result<()> {
        let n = self.order;
        for len in [r.len(), s.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        match &self.inner {
            CoupledInner::Dense(lu) => {
                let mut rhs = Vec::with_capacity(2 * n);
                rhs.extend_from_slice(r);
                rhs.extend_from_slice(s);
                lu.solve_in_place(&mut rhs)?;
                r.copy_from_slice(&rhs[..n]);
                s.copy_from_slice(&rhs[n..]);
                Ok(())
            }
            CoupledInner::Spectral { modes, plan } => {
                plan.forward(r);
                plan.forward(s);
                for ((rh, sh), [a, b, g]) in r.iter_mut().zip(s.iter_mut()).zip(modes) {
                    let (rv, sv) = (*rh, *sh);
                    *rh = b * rv - g * sv;
                    *sh = a * sv + g * rv;
                }
                plan.inverse(r);
                plan.inverse(s);
                Ok(())
            }
        }
    }
}
