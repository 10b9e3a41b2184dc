mod common;

use common::*;
use paradiag_core::numkit::{
    dft, lu_factor, rank2_eigs_from_traces, DenseMatrix, DftPlan, Direction,
};
use paradiag_core::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Textbook O(n²) sum with angles reduced exactly.
fn naive_forward(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            v.iter()
                .enumerate()
                .map(|(k, x)| {
                    let a = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                    x * Complex64::new(a.cos(), a.sin())
                })
                .sum()
        })
        .collect()
}

#[test]
fn round_trip_all_small_lengths() {
    let mut r = rng(1);
    let lengths: Vec<usize> = (1..=64).chain([127, 128, 300, 1021]).collect();
    for n in lengths {
        let v = rand_complex(&mut r, n);
        let f = dft(&v, Direction::Forward).unwrap();
        let back = dft(&f, Direction::Inverse).unwrap();
        assert!(rel_diff(&back, &v) < 1e-12, "n={n}");
    }
}

#[test]
fn fast_paths_match_naive_sum() {
    let mut r = rng(2);
    // power of two, composite, prime, and long lengths through the chirp path
    for n in [16usize, 60, 127, 256, 257, 300, 509, 1024] {
        let v = rand_complex(&mut r, n);
        let fast = dft(&v, Direction::Forward).unwrap();
        let slow = naive_forward(&v);
        assert!(rel_diff(&fast, &slow) < 1e-10, "n={n}");
    }
}

#[test]
fn lu_reconstructs_pa() {
    let mut r = rng(3);
    for n in [1usize, 3, 10, 33, 64] {
        let a = DenseMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
        let f = lu_factor(&a).unwrap();
        let lu = f.lower().matmul(&f.upper()).unwrap();
        let perm = f.permutation();
        let scale = a.max_abs();
        for i in 0..n {
            for j in 0..n {
                assert!((lu[(i, j)] - a[(perm[i], j)]).abs() <= 1e-12 * scale * n as f64);
            }
        }
        // inverse round trip
        let inv = f.inverse().unwrap();
        let id = a.matmul(&inv).unwrap();
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - e).abs() < 1e-8, "n={n}");
            }
        }
    }
}

#[test]
fn lu_solve_residual_complex() {
    let mut r = rng(4);
    let n = 24;
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let z = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        if i == j {
            z + 3.0
        } else {
            z
        }
    });
    let b = rand_complex(&mut r, n);
    let x = lu_factor(&a).unwrap().solve(&b).unwrap();
    assert!(rel_diff(&a.matvec(&x).unwrap(), &b) < 1e-10);
}

#[test]
fn plan_reuse_and_threshold_override() {
    let mut r = rng(5);
    let v = rand_complex(&mut r, 97);
    let direct = DftPlan::with_threshold(97, 1000).unwrap();
    let chirp = DftPlan::with_threshold(97, 2).unwrap();
    let (mut a, mut b) = (v.clone(), v.clone());
    direct.forward(&mut a);
    chirp.forward(&mut b);
    assert!(rel_diff(&a, &b) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_two_products(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let u = DenseMatrix::from_fn(n, 2, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let v = DenseMatrix::from_fn(2, n, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let m = u.matmul(&v).unwrap();
        let small = v.matmul(&u).unwrap();
        // eigenvalues of the 2 × 2 by the quadratic formula
        let tr = small[(0, 0)] + small[(1, 1)];
        let det = small[(0, 0)] * small[(1, 1)] - small[(0, 1)] * small[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        let e = [(tr + disc) / 2.0, (tr - disc) / 2.0];
        let (a, b) = rank2_eigs_from_traces(&m).unwrap();
        let scale = e[0].norm().max(e[1].norm()).max(1.0);
        let d1 = (a - e[0]).norm().max((b - e[1]).norm());
        let d2 = (a - e[1]).norm().max((b - e[0]).norm());
        // nearly coincident roots lose half the digits to the square root
        let tol = if (e[0] - e[1]).norm() < 1e-4 * scale { 1e-6 } else { 1e-10 };
        prop_assert!(d1.min(d2) <= tol * scale, "{d1} {d2}");
    }

    #[test]
    fn round_trip_random_lengths(seed in any::<u64>(), n in 1usize..400) {
        let mut r = rng(seed);
        let v = rand_complex(&mut r, n);
        let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        prop_assert!(rel_diff(&back, &v) < 1e-12);
    }
}
