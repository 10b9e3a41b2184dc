mod common;

use common::*;
use paradiag_core::assembly;
use paradiag_core::krylov::GmresConfig;
use paradiag_core::numkit::lu_factor;
use paradiag_core::solve::solve;
use paradiag_core::spatial::SpatialOperator;
use paradiag_core::Complex64;

fn tight() -> GmresConfig {
    GmresConfig::new(1e-12, 200).unwrap()
}

fn max_err(a: &[f64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y.re).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn tracking_matches_unscaled_dense_solve() {
    for op in [SpatialOperator::laplacian_1d_isolated(2).unwrap(), nonsymmetric_2x2()] {
        let p = tracking_problem(op, 5, 1.0, 0.05, 11);
        let (a, b) = assembly::tracking_system_unscaled(&p).unwrap();
        let x = lu_factor(&a).unwrap().solve(&to_c(&b)).unwrap();
        let n = p.stack_len();
        for alpha in [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, 0.4)] {
            let s = solve(&p, alpha, tight()).unwrap();
            assert!(s.converged);
            assert!(max_err(&s.state, &x[..n]) < 1e-9);
            assert!(max_err(&s.adjoint, &x[n..]) < 1e-9);
        }
    }
}

#[test]
fn terminal_matches_dense_solve() {
    for op in [SpatialOperator::laplacian_1d_isolated(2).unwrap(), nonsymmetric_2x2()] {
        let p = terminal_problem(op, 4, 1.0, 0.05, 12);
        let a = assembly::terminal_system(&p).unwrap();
        let x = lu_factor(&a).unwrap().solve(&to_c(&p.rhs())).unwrap();
        let n = p.stack_len();
        let s = solve(&p, Complex64::new(1e-4, 0.0), tight()).unwrap();
        assert!(s.converged);
        assert!(max_err(&s.state, &x[..n]) < 1e-9);
        assert!(max_err(&s.adjoint, &x[n..]) < 1e-9);
    }
}

#[test]
fn control_is_negative_scaled_adjoint() {
    let p = terminal_problem(SpatialOperator::laplacian_1d_isolated(6).unwrap(), 10, 1.0, 0.3, 3);
    let s = solve(&p, Complex64::new(1e-4, 0.0), GmresConfig::default()).unwrap();
    for (u, l) in s.control.iter().zip(&s.adjoint) {
        assert_eq!(*u, -l / 0.3);
    }
    assert!(s.true_relres < 1e-5);
    assert_eq!(s.residual_history.len(), s.iterations + 1);
}

#[test]
fn zero_data_gives_zero_solution() {
    let op = SpatialOperator::laplacian_1d_isolated(3).unwrap();
    let p = paradiag_core::allatonce::ControlProblem::tracking(op, 0.1, 1.0, 6, vec![0.0; 3], vec![0.0; 15]).unwrap();
    let s = solve(&p, Complex64::new(-1.0, 0.0), GmresConfig::default()).unwrap();
    assert_eq!(s.iterations, 0);
    assert!(s.converged);
    assert!(s.state.iter().chain(&s.adjoint).all(|&v| v == 0.0));
}
