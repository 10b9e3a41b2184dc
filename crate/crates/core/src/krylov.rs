//! Left-preconditioned full GMRES (no restarts, zero initial guess).
//!
//! The stopping test and the reported history use the preconditioned residual
//! `‖P⁻¹(b − A x_k)‖ / ‖P⁻¹ b‖`, obtained for free from the Givens-rotated
//! least-squares problem.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, norm2, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iter: 25,
        }
    }
}

impl GmresConfig {
    pub fn new(rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidParameter("rel_tol must be positive"));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1"));
        }
        Ok(Self { rel_tol, max_iter })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// `history[k]` is the relative preconditioned residual after `k` iterations.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl<T> KrylovOutcome<T> {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s)` with real `c`.
fn givens<T: Scalar>(a: T, b: T) -> (f64, T) {
    let (na, nb) = (a.abs(), b.abs());
    if nb == 0.0 {
        return (1.0, T::zero());
    }
    if na == 0.0 {
        return (0.0, b.conj().scale(1.0 / nb));
    }
    let rho = libm::hypot(na, nb);
    let phase = a.scale(1.0 / na);
    (na / rho, phase * b.conj().scale(1.0 / rho))
}

/// Solve `P⁻¹A x = P⁻¹b`; `apply_a` and `apply_pinv` map length-`n` vectors.
pub fn gmres<T, A, P>(mut apply_a: A, mut apply_pinv: P, b: &[T], cfg: GmresConfig) -> Result<KrylovOutcome<T>>
where
    T: Scalar,
    A: FnMut(&[T]) -> Result<Vec<T>>,
    P: FnMut(&[T]) -> Result<Vec<T>>,
{
    let cfg = GmresConfig::new(cfg.rel_tol, cfg.max_iter)?;
    let n = b.len();
    if !b.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let r0 = apply_pinv(b)?;
    if r0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r0.len(),
        });
    }
    let beta = norm2(&r0);
    if !beta.is_finite() {
        return Err(Error::NonFinite);
    }
    if beta == 0.0 {
        // x = 0 is exact
        return Ok(KrylovOutcome {
            solution: vec![T::zero(); n],
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
        });
    }

    let kmax = cfg.max_iter.min(n.max(1));
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(kmax + 1);
    basis.push(r0.iter().map(|x| x.scale(1.0 / beta)).collect());
    // column-wise upper Hessenberg, already rotated
    let mut h: Vec<Vec<T>> = Vec::with_capacity(kmax);
    let mut rot: Vec<(f64, T)> = Vec::with_capacity(kmax);
    let mut g = vec![T::zero(); kmax + 1];
    g[0] = T::from_f64(beta);
    let mut history = vec![1.0];
    let mut converged = false;

    for j in 0..kmax {
        let av = apply_a(&basis[j])?;
        let mut w = apply_pinv(&av)?;
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.len(),
            });
        }
        let mut col = vec![T::zero(); j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(v, &w);
            col[i] = hij;
            axpy(-hij, v, &mut w);
        }
        let hnext = norm2(&w);
        if !hnext.is_finite() || !col.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        col[j + 1] = T::from_f64(hnext);

        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, bb) = (col[i], col[i + 1]);
            col[i] = a.scale(c) + s * bb;
            col[i + 1] = bb.scale(c) - s.conj() * a;
        }
        let (c, s) = givens(col[j], col[j + 1]);
        col[j] = col[j].scale(c) + s * col[j + 1];
        col[j + 1] = T::zero();
        let gj = g[j];
        g[j] = gj.scale(c);
        g[j + 1] = -(s.conj() * gj);
        rot.push((c, s));
        h.push(col);

        let rel = g[j + 1].abs() / beta;
        history.push(rel);

        let breakdown = hnext <= 1e-14 * beta.max(1e-300);
        if rel <= cfg.rel_tol {
            converged = true;
        }
        if converged || breakdown || j + 1 == kmax {
            break;
        }
        basis.push(w.iter().map(|x| x.scale(1.0 / hnext)).collect());
    }

    let k = h.len();
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (jj, yj) in y.iter().enumerate().skip(i + 1) {
            acc -= h[jj][i] * *yj;
        }
        let d = h[i][i];
        if d.abs() == 0.0 {
            return Err(Error::SingularMatrix { pivot: i });
        }
        y[i] = acc / d;
    }
    let mut x = vec![T::zero(); n];
    for (v, &yi) in basis.iter().zip(&y) {
        axpy(yi, v, &mut x);
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let converged = converged || history.last().copied().unwrap_or(1.0) <= cfg.rel_tol;
    Ok(KrylovOutcome {
        solution: x,
        iterations: k,
        residual_history: history,
        converged,
    })
}

/// `‖b − A x‖ / ‖b‖` (unpreconditioned).
pub fn relative_residual<T: Scalar>(
    apply_a: impl FnOnce(&[T]) -> Result<Vec<T>>,
    b: &[T],
    x: &[T],
) -> Result<f64> {
    let ax = apply_a(x)?;
    let mut r = b.to_vec();
    for (ri, ai) in r.iter_mut().zip(&ax) {
        *ri -= *ai;
    }
    let nb = norm2(b);
    Ok(if nb == 0.0 { norm2(&r) } else { norm2(&r) / nb })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(v: &[f64]) -> Result<Vec<f64>> {
        Ok(v.to_vec())
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = [1.0, -2.0, 3.0];
        let out = gmres(id, id, &b, GmresConfig::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        for (x, y) in out.solution.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_two_by_two_by_hand() {
        let a = |v: &[f64]| Ok(vec![v[0], 2.0 * v[1]]);
        let out = gmres(a, id, &[1.0, 1.0], GmresConfig::new(1e-12, 25).unwrap()).unwrap();
        assert_eq!(out.iterations, 2);
        assert!((out.residual_history[1] - 1.0 / libm::sqrt(10.0)).abs() < 1e-14);
        assert!((out.solution[0] - 1.0).abs() < 1e-13);
        assert!((out.solution[1] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let out = gmres(id, id, &[0.0; 4], GmresConfig::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
        assert_eq!(out.solution, vec![0.0; 4]);
    }

    #[test]
    fn nan_aborts() {
        assert_eq!(
            gmres(id, id, &[f64::NAN, 1.0], GmresConfig::default()).unwrap_err(),
            Error::NonFinite
        );
    }

    #[test]
    fn bad_config_rejected() {
        assert!(GmresConfig::new(0.0, 10).is_err());
        assert!(GmresConfig::new(1e-6, 0).is_err());
    }
}
