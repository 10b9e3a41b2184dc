#![allow(dead_code)]

use paradiag_core::allatonce::ControlProblem;
use paradiag_core::numkit::DenseMatrix;
use paradiag_core::spatial::SpatialOperator;
use paradiag_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_real(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

pub fn rand_complex(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect()
}

pub fn to_c(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    max_diff(a, b) / max_abs(b).max(1e-300)
}

/// A non-symmetric 2×2 operator whose symmetric part is positive definite.
pub fn nonsymmetric_2x2() -> SpatialOperator {
    SpatialOperator::from_dense(DenseMatrix::from_row_major(2, 2, vec![2.0, -1.5, 0.5, 1.0]).unwrap()).unwrap()
}

/// Operators of order 1 and 2 used across the dense-equivalence tests.
pub fn small_operators() -> Vec<(&'static str, SpatialOperator)> {
    vec![
        ("scalar", SpatialOperator::scalar(1.3).unwrap()),
        ("laplacian1d", SpatialOperator::laplacian_1d_isolated(2).unwrap()),
        ("nonsymmetric", nonsymmetric_2x2()),
        (
            "spectral",
            SpatialOperator::from_symbol(1, 2, vec![Complex64::new(0.5, 0.0), Complex64::new(3.0, 0.0)]).unwrap(),
        ),
    ]
}

pub fn tracking_problem(op: SpatialOperator, l: usize, t: f64, gamma: f64, seed: u64) -> ControlProblem {
    let m = op.order();
    let mut r = rng(seed);
    let y_init = rand_real(&mut r, m);
    let y_d = rand_real(&mut r, (l - 1) * m);
    ControlProblem::tracking(op, gamma, t, l, y_init, y_d).unwrap()
}

pub fn terminal_problem(op: SpatialOperator, l: usize, t: f64, gamma: f64, seed: u64) -> ControlProblem {
    let m = op.order();
    let mut r = rng(seed);
    let y_init = rand_real(&mut r, m);
    let y_target = rand_real(&mut r, m);
    ControlProblem::terminal(op, gamma, t, l, y_init, y_target).unwrap()
}
