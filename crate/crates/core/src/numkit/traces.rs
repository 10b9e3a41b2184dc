use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Relative tolerance on `tr(M³) = λ₁³ + λ₂³`.
pub const TRACE_CONSISTENCY_TOL: f64 = 1e-8;

/// Roots of `x² − s x + p`, ordered with the larger modulus first.
///
/// The small root comes from `p / big` so it keeps full relative accuracy
/// when the roots differ by many orders of magnitude.
pub fn quadratic_roots(s: Complex64, p: Complex64) -> (Complex64, Complex64) {
    let disc = (s * s - p * 4.0).sqrt();
    let plus = s + disc;
    let minus = s - disc;
    let big = if plus.norm() >= minus.norm() { plus } else { minus } * 0.5;
    if big.norm() == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    (big, p / big)
}

/// The two possibly non-zero eigenvalues of a matrix known to have rank ≤ 2.
///
/// Uses Newton's identities on `tr(M)` and `tr(M²)`; `tr(M³)` is checked against
/// `λ₁³ + λ₂³` and a mismatch is reported as [`Error::RankInconsistent`].
pub fn rank2_eigs_from_traces(m: &DenseMatrix<Complex64>) -> Result<(Complex64, Complex64)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.all_finite() {
        return Err(Error::NonFinite);
    }
    let m2 = m.matmul(m)?;
    let p1 = m.trace();
    let p2 = m2.trace();
    // tr(M³) = Σ_ij (M²)_ij M_ji, no third product needed
    let n = m.rows();
    let mut p3 = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            p3 += m2[(i, j)] * m[(j, i)];
        }
    }
    let e2 = (p1 * p1 - p2) * 0.5;
    let (l1, l2) = quadratic_roots(p1, e2);

    let predicted = l1 * l1 * l1 + l2 * l2 * l2;
    let (a1, a2) = (l1.norm(), l2.norm());
    let scale = a1 * a1 * a1 + a2 * a2 * a2 + m2.max_abs() * m.max_abs() * f64::EPSILON;
    let err = if scale == 0.0 {
        p3.norm()
    } else {
        (p3 - predicted).norm() / scale
    };
    if !(err <= TRACE_CONSISTENCY_TOL) {
        return Err(Error::RankInconsistent {
            relative_error: err,
        });
    }
    Ok((l1, l2))
}

/// Real-matrix convenience wrapper.
pub fn rank2_eigs_from_traces_real(m: &DenseMatrix<f64>) -> Result<(Complex64, Complex64)> {
    rank2_eigs_from_traces(&m.map(|x| x.to_c64()))
}
