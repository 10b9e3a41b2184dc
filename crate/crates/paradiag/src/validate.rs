//! Desk-scale self-check: every module against a small independent oracle.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use anyhow::Result;
use paradiag_core::allatonce::{ControlProblem, ObjectiveKind};
use paradiag_core::assembly;
use paradiag_core::krylov::GmresConfig;
use paradiag_core::numkit::{dft, lu_factor, DenseMatrix, Direction};
use paradiag_core::precond::Preconditioner;
use paradiag_core::solve::solve;
use paradiag_core::spatial::SpatialOperator;
use paradiag_core::spectra::{
    corner_entries_terminal, corner_entries_tracking, horizon_limits, oracle_preconditioned_spectrum,
    semidisk_check, terminal_omega, tracking_omega, z_pair, ModeParams,
};
use paradiag_core::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} failed, {:.1} s",
            self.checks.len(),
            failed,
            self.seconds
        )
    }
}

type CheckFn = fn() -> Result<(f64, f64)>;

/// Each check returns `(error, tol)` and passes when `error ≤ tol`.
const CHECKS: [(&str, CheckFn); 13] = [
    ("dft-vs-direct-sum", check_dft),
    ("lu-residual", check_lu),
    ("stencil-2d", check_stencil),
    ("all-at-once-vs-dense", check_matvec),
    ("preconditioner-vs-lu", check_precond),
    ("gmres-vs-dense-solve", check_end_to_end),
    ("tracking-omega-vs-oracle", check_tracking_spectrum),
    ("terminal-omega-vs-oracle", check_terminal_spectrum),
    ("semidisk-alpha-minus-one", check_semidisk),
    ("corner-entries", check_corners),
    ("z-product", check_z),
    ("horizon-limits", check_limits),
    ("zero-data-solve", check_zero),
];

pub fn run_validate() -> ValidationReport {
    let start = Instant::now();
    let checks = CHECKS
        .iter()
        .map(|(name, f)| match f() {
            Ok((err, tol)) => CheckResult {
                name,
                passed: err <= tol,
                detail: format!("error {err:.3e} (tol {tol:.0e})"),
            },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e:#}"),
            },
        })
        .collect();
    ValidationReport {
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Deterministic pseudo-random values in `[−1, 1)` (xorshift).
struct Noise(u64);

impl Noise {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }

    fn cvec(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(self.next(), self.next())).collect()
    }
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let s = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    d / s.max(f64::MIN_POSITIVE)
}

fn real_to_c(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn pair_err(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    let d1 = (a.0 - b.0).norm().max((a.1 - b.1).norm());
    let d2 = (a.0 - b.1).norm().max((a.1 - b.0).norm());
    d1.min(d2) / b.0.norm().max(b.1.norm()).max(f64::MIN_POSITIVE)
}

fn check_dft() -> Result<(f64, f64)> {
    let mut rng = Noise(0x9e37_79b9);
    let mut worst = 0.0f64;
    for n in (1..=64).chain([127, 128, 300]) {
        let v = rng.cvec(n);
        let fast = dft(&v, Direction::Forward)?;
        let slow: Vec<Complex64> = (0..n)
            .map(|j| {
                v.iter()
                    .enumerate()
                    .map(|(k, x)| x * Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    .sum()
            })
            .collect();
        worst = worst.max(rel_err(&fast, &slow));
        worst = worst.max(rel_err(&dft(&fast, Direction::Inverse)?, &v));
    }
    Ok((worst, 1e-10))
}

fn check_lu() -> Result<(f64, f64)> {
    let mut rng = Noise(7);
    let n = 30;
    let a = DenseMatrix::from_fn(n, n, |i, j| rng.next() + if i == j { 2.0 } else { 0.0 });
    let b = rng.vec(n);
    let x = lu_factor(&a)?.solve(&b)?;
    let ax = a.matvec(&x)?;
    Ok((rel_err(&real_to_c(&ax), &real_to_c(&b)), 1e-12))
}

/// Explicit periodic stencils against the spectral operators.
fn check_stencil() -> Result<(f64, f64)> {
    let (m, d) = (6usize, 0.3);
    let h = 1.0 / m as f64;
    let mut rng = Noise(11);
    let v = rng.vec(m * m);
    let at = |i: usize, j: usize| v[(i % m) * m + (j % m)];
    let mut lap = vec![0.0; m * m];
    let mut adv = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let c = at(i, j);
            let l = (4.0 * c - at(i + 1, j) - at(i + m - 1, j) - at(i, j + 1) - at(i, j + m - 1)) / (h * h);
            let g = (at(i + 1, j) - at(i + m - 1, j) + at(i, j + 1) - at(i, j + m - 1)) / (2.0 * h);
            lap[i * m + j] = l;
            adv[i * m + j] = d * l + g;
        }
    }
    let e1 = rel_err(
        &real_to_c(&SpatialOperator::laplacian_2d_periodic(m)?.apply(&v, false)?),
        &real_to_c(&lap),
    );
    let e2 = rel_err(
        &real_to_c(&SpatialOperator::advection_diffusion_2d_periodic(m, d)?.apply(&v, false)?),
        &real_to_c(&adv),
    );
    Ok((e1.max(e2), 1e-12))
}

fn small_problems() -> Result<Vec<ControlProblem>> {
    let nonsym = SpatialOperator::from_dense(DenseMatrix::from_row_major(2, 2, vec![2.0, -1.5, 0.5, 1.0])?)?;
    let ops = [SpatialOperator::laplacian_1d_isolated(2)?, nonsym, SpatialOperator::advection_diffusion_2d_periodic(2, 0.1)?];
    let mut rng = Noise(23);
    let mut out = Vec::new();
    for op in ops {
        let m = op.order();
        out.push(ControlProblem::tracking(op.clone(), 0.05, 1.0, 5, rng.vec(m), rng.vec(4 * m))?);
        out.push(ControlProblem::terminal(op, 0.05, 1.0, 4, rng.vec(m), rng.vec(m))?);
    }
    Ok(out)
}

fn check_matvec() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut rng = Noise(31);
    for p in small_problems()? {
        let dense = assembly::system(&p)?;
        let x = rng.vec(p.system_len());
        worst = worst.max(rel_err(&real_to_c(&p.matvec(&x)?), &dense.matvec(&real_to_c(&x))?));
    }
    Ok((worst, 1e-12))
}

fn check_precond() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut rng = Noise(37);
    for p in small_problems()? {
        let alpha = match p.kind() {
            ObjectiveKind::Tracking => Complex64::new(-1.0, 0.0),
            ObjectiveKind::Terminal => Complex64::new(1e-4, 0.0),
        };
        let lu = lu_factor(&assembly::preconditioner(&p, alpha)?)?;
        let v = rng.cvec(p.system_len());
        let fast = Preconditioner::new(&p, alpha)?.apply_flat(&v)?;
        worst = worst.max(rel_err(&fast, &lu.solve(&v)?));
    }
    Ok((worst, 1e-9))
}

fn check_end_to_end() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for p in small_problems()? {
        let (alpha, x_ref) = match p.kind() {
            ObjectiveKind::Tracking => {
                let (a, b) = assembly::tracking_system_unscaled(&p)?;
                (-1.0, lu_factor(&a)?.solve(&real_to_c(&b))?)
            }
            ObjectiveKind::Terminal => (1e-4, lu_factor(&assembly::terminal_system(&p)?)?.solve(&real_to_c(&p.rhs()))?),
        };
        let s = solve(&p, Complex64::new(alpha, 0.0), GmresConfig::new(1e-12, 100)?)?;
        let x: Vec<f64> = s.state.iter().chain(&s.adjoint).copied().collect();
        worst = worst.max(rel_err(&real_to_c(&x), &x_ref));
    }
    Ok((worst, 1e-7))
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    [0.05, 0.3, 0.6, 0.9, 0.99]
        .into_iter()
        .flat_map(|phi| [1e-3, 0.05, 0.7, 4.0].into_iter().map(move |psi| (phi, psi)))
}

fn check_tracking_spectrum() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for (phi, psi) in grid() {
        let m = ModeParams::from_phi_psi(phi, psi)?;
        for alpha in [1.0, -1.0] {
            for n in [4, 9, 33, 100] {
                let oracle = oracle_preconditioned_spectrum(&m, alpha, n, ObjectiveKind::Tracking)?;
                worst = worst.max(pair_err(tracking_omega(&m, alpha, n)?, oracle));
            }
        }
    }
    Ok((worst, 1e-8))
}

fn check_terminal_spectrum() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for (phi, psi) in grid() {
        let m = ModeParams::from_phi_psi(phi, psi)?;
        for alpha in [1e-4, 0.1, -0.5] {
            for l in [4, 9, 40] {
                let oracle = oracle_preconditioned_spectrum(&m, alpha, l, ObjectiveKind::Terminal)?;
                worst = worst.max(pair_err(terminal_omega(&m, alpha, l)?, oracle));
            }
        }
    }
    Ok((worst, 1e-8))
}

/// Largest excursion beyond the semidisk (0 when all contained).
fn check_semidisk() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for i in 1..40 {
        let phi = i as f64 / 40.0;
        for k in -12..=12 {
            let psi = 10f64.powf(k as f64 / 4.0);
            let m = ModeParams::from_phi_psi(phi, psi)?;
            for n in [4, 17, 128, 1000] {
                let (w1, w2) = tracking_omega(&m, -1.0, n)?;
                for w in [w1, w2] {
                    let t = w + 1.0;
                    if !semidisk_check(t, 1e-12).contained() {
                        worst = worst.max((0.5 - t.re).max((t - 0.5).norm() - 0.5));
                    }
                }
            }
        }
    }
    Ok((worst, 0.0))
}

fn check_corners() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for (phi, psi) in grid() {
        let m = ModeParams::from_phi_psi(phi, psi)?;
        for n in [1usize, 3, 20] {
            for alpha in [1.0, -1.0] {
                let c = DenseMatrix::from_fn(n, n, |i, j| {
                    (i == j) as u8 as f64 - phi * ((i == j + 1) as u8 as f64 + alpha * (i == 0 && j == n - 1) as u8 as f64)
                });
                let mut g = c.matmul(&c.transpose())?;
                for i in 0..n {
                    g[(i, i)] += psi * psi;
                }
                let h = lu_factor(&g)?.inverse()?;
                let (h00, h0n) = corner_entries_tracking(&m, alpha, n)?;
                let s = psi * h[(0, 0)];
                worst = worst.max((h00 - s).abs() / s).max((h0n - psi * h[(0, n - 1)]).abs() / s);
            }
            let alpha = 1e-4;
            let c = DenseMatrix::from_fn(n, n, |i, j| {
                (i == j) as u8 as f64 - phi * ((i == j + 1) as u8 as f64 + alpha * (i == 0 && j == n - 1) as u8 as f64)
            });
            let h = lu_factor(&c)?.inverse()?;
            let g: f64 = (0..n).map(|j| h[(n - 1, j)].powi(2)).sum();
            let (hl, gl) = corner_entries_terminal(&m, alpha, n)?;
            worst = worst.max((hl - h[(n - 1, 0)]).abs() / h[(n - 1, 0)].abs()).max((gl - g).abs() / g);
        }
    }
    Ok((worst, 1e-10))
}

fn check_z() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for (phi, psi) in grid() {
        let (z1, z2) = z_pair(&ModeParams::from_phi_psi(phi, psi)?)?;
        worst = worst.max((z1 * z2 - 1.0).abs());
    }
    Ok((worst, 1e-12))
}

fn check_limits() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    for phi in [0.1, 0.5, 0.9] {
        for psi in [0.01, 0.5, 3.0] {
            let m = ModeParams::from_phi_psi(phi, psi)?;
            let (t, _) = horizon_limits(&m, ObjectiveKind::Tracking)?;
            let (w1, w2) = tracking_omega(&m, -1.0, 500)?;
            let w = if w1.im > 0.0 { w1 } else { w2 };
            worst = worst.max((t - (w + 1.0)).norm());
        }
    }
    Ok((worst, 1e-6))
}

fn check_zero() -> Result<(f64, f64)> {
    let op = SpatialOperator::laplacian_2d_periodic(4)?;
    let p = ControlProblem::tracking(op.clone(), 0.05, 1.0, 6, vec![0.0; 16], vec![0.0; 80])?;
    let q = ControlProblem::terminal(op, 0.05, 1.0, 6, vec![0.0; 16], vec![0.0; 16])?;
    let mut worst = 0.0f64;
    for (p, a) in [(p, -1.0), (q, 1e-4)] {
        let s = solve(&p, Complex64::new(a, 0.0), GmresConfig::default())?;
        let norm = s.state.iter().chain(&s.adjoint).fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(norm).max(s.iterations as f64);
    }
    Ok((worst, 0.0))
}
