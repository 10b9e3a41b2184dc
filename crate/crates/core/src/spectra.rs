//! Closed-form eigenvalues of the preconditioned systems, per spatial mode.
//!
//! After diagonalising `K`, every spatial eigenvalue `σ` gives a scalar problem
//! parameterised by `φ = 1/(1 + τσ)` and `ψ = γ̂ φ`, where `γ̂ = τ/√γ` (tracking)
//! or `τ/γ` (terminal). `P⁻¹A − I` then has rank two per mode, so two numbers `ω`
//! describe the whole mode and the preconditioned eigenvalues are `θ = 1 + ω`.
//!
//! Besides the formulas, [`oracle_preconditioned_spectrum`] assembles the scalar
//! `P` and `R = A − P` densely and extracts the two eigenvalues by power traces;
//! it is the reference every formula is tested against.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::allatonce::{ControlProblem, ObjectiveKind};
use crate::error::{Error, Result};
use crate::numkit::{lu_factor, quadratic_roots, rank2_eigs_from_traces, DenseMatrix};

/// Default band width for [`semidisk_check`].
pub const SEMIDISK_TOL: f64 = 1e-9;
/// Largest scalar system the dense oracle will assemble.
pub const ORACLE_MAX_ORDER: usize = 200;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Per-mode parameters `(σ̂, γ̂, φ, ψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub sigma_hat: f64,
    pub gamma_hat: f64,
    pub phi: f64,
    pub psi: f64,
}

impl ModeParams {
    pub fn new(sigma_hat: f64, gamma_hat: f64) -> Result<Self> {
        let den = 1.0 + sigma_hat;
        if den == 0.0 || !den.is_finite() || !gamma_hat.is_finite() {
            return Err(Error::InvalidParameter("1 + sigma_hat must be finite and non-zero"));
        }
        let phi = 1.0 / den;
        Ok(Self {
            sigma_hat,
            gamma_hat,
            phi,
            psi: gamma_hat * phi,
        })
    }

    pub fn from_phi_psi(phi: f64, psi: f64) -> Result<Self> {
        if phi == 0.0 || !phi.is_finite() || !psi.is_finite() {
            return Err(Error::InvalidParameter("phi must be finite and non-zero"));
        }
        Ok(Self {
            sigma_hat: 1.0 / phi - 1.0,
            gamma_hat: psi / phi,
            phi,
            psi,
        })
    }

    /// `σ̂ = τσ`, `γ̂ = τ/√γ`.
    pub fn for_tracking(sigma: f64, tau: f64, gamma: f64) -> Result<Self> {
        Self::new(tau * sigma, tau / libm::sqrt(gamma))
    }

    /// `σ̂ = τσ`, `γ̂ = τ/γ`.
    pub fn for_terminal(sigma: f64, tau: f64, gamma: f64) -> Result<Self> {
        Self::new(tau * sigma, tau / gamma)
    }

    /// `0 < φ < 1`, i.e. a positive spatial eigenvalue.
    pub fn in_theory_domain(&self) -> bool {
        self.phi > 0.0 && self.phi < 1.0
    }

    /// `1 − φ`, accurate when `φ ≈ 1`.
    fn one_minus_phi(&self) -> f64 {
        self.sigma_hat * self.phi
    }
}

/// The roots `z₁ ≥ z₂` of `φz² − (1 + φ² + ψ²)z + φ`; `z₁z₂ = 1`.
pub fn z_pair(m: &ModeParams) -> Result<(f64, f64)> {
    let zl = ZLog::new(m)?;
    Ok((zl.z1, zl.z2))
}

/// `z₁` and friends in cancellation-free form.
struct ZLog {
    z1: f64,
    z2: f64,
    /// `√((1+φ²+ψ²)² − 4φ²)`
    root: f64,
    /// `ln z₁` (only for `φ > 0`)
    log_z1: f64,
}

impl ZLog {
    fn new(m: &ModeParams) -> Result<Self> {
        let (phi, psi) = (m.phi, m.psi);
        if phi == 0.0 {
            return Err(Error::InvalidParameter("phi must be non-zero"));
        }
        let omp = m.one_minus_phi();
        // s² − 4φ² = ((1−φ)² + ψ²)((1+φ)² + ψ²)
        let lo = omp * omp + psi * psi;
        let hi = (1.0 + phi) * (1.0 + phi) + psi * psi;
        let root = libm::sqrt(lo * hi);
        let s = 1.0 + phi * phi + psi * psi;
        let (z1, z2, log_z1) = if phi > 0.0 {
            // z₁ − 1 = (s − 2φ + root)/(2φ)
            let log_z1 = libm::log1p((lo + root) / (2.0 * phi));
            ((s + root) / (2.0 * phi), 2.0 * phi / (s + root), log_z1)
        } else {
            ((s - root) / (2.0 * phi), 2.0 * phi / (s - root), f64::NAN)
        };
        if !(z1.is_finite() && z2.is_finite()) {
            return Err(Error::NonFinite);
        }
        debug_assert!((z1 * z2 - 1.0).abs() <= 1e-12);
        Ok(Self {
            z1,
            z2,
            root,
            log_z1,
        })
    }

    /// `(1/(1 − αz₁ⁿ), 1/(1 − αz₂ⁿ))` without forming `z₁ⁿ` when it could overflow.
    fn inverse_factors(&self, alpha: f64, n: usize) -> (f64, f64) {
        if self.log_z1.is_finite() {
            let x = -(n as f64) * self.log_z1; // ln z₂ⁿ ≤ 0
            let e = libm::exp(x);
            if alpha == 1.0 {
                let em1 = libm::expm1(x);
                (e / em1, -1.0 / em1)
            } else {
                // 1/(1 − α/e) = e/(e − α)
                (e / (e - alpha), 1.0 / (1.0 - alpha * e))
            }
        } else {
            let p1 = libm::pow(self.z1, n as f64);
            let p2 = libm::pow(self.z2, n as f64);
            let q1 = if p1.abs() > 1.0 {
                let w = 1.0 / p1;
                w / (w - alpha)
            } else {
                1.0 / (1.0 - alpha * p1)
            };
            (q1, 1.0 / (1.0 - alpha * p2))
        }
    }

    fn z1_minus_phi(&self, m: &ModeParams) -> f64 {
        self.z1 - m.phi
    }

    /// `z₂ − φ = φ(1 − φ² − ψ² − root)/(s + root)`
    fn z2_minus_phi(&self, m: &ModeParams) -> f64 {
        let (phi, psi) = (m.phi, m.psi);
        if phi > 0.0 {
            let s = 1.0 + phi * phi + psi * psi;
            let a = m.one_minus_phi() * (1.0 + phi) - psi * psi;
            phi * (a - self.root) / (s + self.root)
        } else {
            self.z2 - phi
        }
    }
}

fn check_unit_alpha(alpha: f64) -> Result<()> {
    if alpha != 1.0 && alpha != -1.0 {
        return Err(Error::InvalidParameter("alpha must be +1 or -1"));
    }
    Ok(())
}

fn check_tracking_theory(m: &ModeParams, n: usize) -> Result<()> {
    if n <= 3 {
        return Err(Error::OutsideTheory("tracking formulas need more than 3 time blocks"));
    }
    if m.phi == 0.0 || m.phi.abs() == 1.0 {
        return Err(Error::OutsideTheory("tracking formulas need phi outside {0, 1, -1}"));
    }
    if m.psi == 0.0 {
        return Err(Error::OutsideTheory("tracking formulas need psi != 0"));
    }
    Ok(())
}

/// Formula for the two non-trivial eigenvalues of `P⁻¹R` without domain checks.
fn tracking_omega_raw(m: &ModeParams, alpha: f64, n: usize) -> Result<(Complex64, Complex64)> {
    let zl = ZLog::new(m)?;
    let (q1, q2) = zl.inverse_factors(alpha, n);
    // z₂ − z₁ = −root/φ
    let inv_dz = -m.phi / zl.root;
    let a1 = zl.z1_minus_phi(m);
    let a2 = zl.z2_minus_phi(m);
    let re = (a1 * q1 - a2 * q2) * inv_dz;
    let im = m.psi * (q1 - q2) * inv_dz;
    let w1 = c(re, im);
    if !w1.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((w1, w1.conj()))
}

/// `(ω₁, ω₂)` for tracking with `α = ±1` and `n = L̂` time blocks; `ω₁` carries `+ψi`.
pub fn tracking_omega(m: &ModeParams, alpha: f64, n: usize) -> Result<(Complex64, Complex64)> {
    check_unit_alpha(alpha)?;
    check_tracking_theory(m, n)?;
    tracking_omega_raw(m, alpha, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemidiskStatus {
    Inside,
    Boundary,
    Outside,
}

impl SemidiskStatus {
    /// Inside or on the boundary band.
    pub fn contained(self) -> bool {
        self != SemidiskStatus::Outside
    }
}

/// Membership in `{Re θ ≥ ½, |θ − ½| ≤ ½}` with a boundary band of width `tol`.
pub fn semidisk_check(theta: Complex64, tol: f64) -> SemidiskStatus {
    let dist = (theta - c(0.5, 0.0)).norm();
    if theta.re < 0.5 - tol || dist > 0.5 + tol {
        SemidiskStatus::Outside
    } else if (dist - 0.5).abs() <= tol || (theta.re - 0.5).abs() <= tol {
        SemidiskStatus::Boundary
    } else {
        SemidiskStatus::Inside
    }
}

fn terminal_denominator(m: &ModeParams, alpha: f64, l: usize) -> Result<(f64, f64)> {
    let phi_l = pow_phi(m, l);
    let den = 1.0 - alpha * phi_l;
    if den == 0.0 {
        return Err(Error::InvalidParameter("alpha * phi^L must differ from 1"));
    }
    Ok((phi_l, den))
}

/// `φⁿ`, through `log1p(σ̂)` when `φ > 0`.
fn pow_phi(m: &ModeParams, n: usize) -> f64 {
    if m.phi > 0.0 {
        libm::exp(-(n as f64) * libm::log1p(m.sigma_hat))
    } else {
        libm::pow(m.phi, n as f64)
    }
}

/// `(1 − φ^{2L})/(1 − φ²)` without cancellation near `φ = 1`.
fn geometric_ratio(m: &ModeParams, l: usize) -> f64 {
    if m.phi * m.phi == 1.0 {
        l as f64
    } else if m.phi > 0.0 {
        let lg = libm::log1p(m.sigma_hat);
        let num = -libm::expm1(-2.0 * l as f64 * lg);
        let den = -libm::expm1(-2.0 * lg);
        num / den
    } else {
        (1.0 - libm::pow(m.phi, 2.0 * l as f64)) / (1.0 - m.phi * m.phi)
    }
}

/// Corner entries `(h_{L,0}, g_{L,L})` of the terminal-cost inverse.
pub fn corner_entries_terminal(m: &ModeParams, alpha: f64, l: usize) -> Result<(f64, f64)> {
    if l == 0 {
        return Err(Error::EmptyInput);
    }
    let (_, den) = terminal_denominator(m, alpha, l)?;
    let h = pow_phi(m, l - 1) / den;
    let g = geometric_ratio(m, l) / (den * den);
    Ok((h, g))
}

/// The reduced `2 × 2` matrix whose eigenvalues are the terminal-cost `ω`.
pub fn terminal_mred(m: &ModeParams, alpha: f64, l: usize) -> Result<DenseMatrix<Complex64>> {
    if l < 2 {
        return Err(Error::InvalidParameter("terminal formulas need L >= 2"));
    }
    let (h, g) = corner_entries_terminal(m, alpha, l)?;
    let (phi, psi) = (m.phi, m.psi);
    let ap = alpha * phi;
    DenseMatrix::from_row_major(
        2,
        2,
        alloc::vec![c(ap * h + psi * g, 0.0), c(-ap * psi * g, 0.0), c(-h, 0.0), c(ap * h, 0.0)],
    )
}

/// Eigenvalues of [`terminal_mred`], larger modulus first.
pub fn terminal_omega(m: &ModeParams, alpha: f64, l: usize) -> Result<(Complex64, Complex64)> {
    let r = terminal_mred(m, alpha, l)?;
    let tr = r[(0, 0)] + r[(1, 1)];
    let det = r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)];
    Ok(quadratic_roots(tr, det))
}

/// `(h₀₀, h₀ₙ)` of `ψ(ψ²I + C(α)C(α)ᵀ)⁻¹` with `C(α) = I − φ(S + α e₀eₙᵀ)`, `α = ±1`.
pub fn corner_entries_tracking(m: &ModeParams, alpha: f64, n: usize) -> Result<(f64, f64)> {
    check_unit_alpha(alpha)?;
    if !m.in_theory_domain() {
        return Err(Error::OutsideTheory("corner formulas need 0 < phi < 1"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let zl = ZLog::new(m)?;
    let (q1, q2) = zl.inverse_factors(alpha, n);
    // ψ/(φ(z₂ − z₁)) = −ψ/root
    let pre = -m.psi / zl.root;
    let h00 = pre * (q1 - q2);
    let h0n = alpha * pre * (zl.z1 * q1 - zl.z2 * q2);
    Ok((h00, h0n))
}

/// `L → ∞` at fixed `τ`: `(θ₁, θ₂)`.
pub fn horizon_limits(m: &ModeParams, objective: ObjectiveKind) -> Result<(Complex64, Complex64)> {
    if !m.in_theory_domain() {
        return Err(Error::OutsideTheory("horizon limits need 0 < phi < 1"));
    }
    Ok(match objective {
        ObjectiveKind::Tracking => {
            let zl = ZLog::new(m)?;
            let t = c(zl.z1_minus_phi(m), m.psi) * (m.phi / zl.root);
            (t, t.conj())
        }
        ObjectiveKind::Terminal => {
            let one_minus_phi2 = m.one_minus_phi() * (1.0 + m.phi);
            (c(1.0 + m.psi / one_minus_phi2, 0.0), c(1.0, 0.0))
        }
    })
}

/// `τ → 0` at fixed `T` (`L = T/τ → ∞`): `(θ₁, θ₂)` for spatial eigenvalue `σ`.
///
/// The terminal branch is `1 + (1 − e^{−2σT})/(2γσ)`, the limit of
/// `1 + ψ(1 − φ^{2L})/(1 − φ²)`.
pub fn timestep_limits(
    sigma: f64,
    gamma: f64,
    horizon: f64,
    alpha: f64,
    objective: ObjectiveKind,
) -> Result<(Complex64, Complex64)> {
    if !(sigma > 0.0 && gamma > 0.0 && horizon > 0.0) {
        return Err(Error::OutsideTheory("time-step limits need sigma, gamma, T > 0"));
    }
    Ok(match objective {
        ObjectiveKind::Tracking => {
            check_unit_alpha(alpha)?;
            let sg = libm::sqrt(gamma);
            let rad = libm::sqrt(gamma * sigma * sigma + 1.0);
            let th = libm::tanh(horizon * rad / (2.0 * sg));
            let f = if alpha == 1.0 { 1.0 / th } else { th };
            let t = c(0.5, 0.0) + c(sg * sigma, 1.0) * (f / (2.0 * rad));
            (t, t.conj())
        }
        ObjectiveKind::Terminal => {
            let v = 1.0 - libm::expm1(-2.0 * sigma * horizon) / (2.0 * gamma * sigma);
            (c(v, 0.0), c(1.0, 0.0))
        }
    })
}

/// The scalar `P(α)` and `R = A − P(α)` of one mode, as `2n × 2n` dense matrices.
pub fn scalar_mode_matrices(
    m: &ModeParams,
    alpha: f64,
    n: usize,
    objective: ObjectiveKind,
) -> Result<(DenseMatrix<Complex64>, DenseMatrix<Complex64>)> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let (phi, psi) = (m.phi, m.psi);
    let mut a = DenseMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, i)] = c(1.0, 0.0);
        a[(n + i, n + i)] = c(1.0, 0.0);
        a[(i, n + i)] = c(psi, 0.0);
        if i > 0 {
            a[(i, i - 1)] = c(-phi, 0.0);
        }
        if i + 1 < n {
            a[(n + i, n + i + 1)] = c(-phi, 0.0);
        }
    }
    match objective {
        ObjectiveKind::Tracking => {
            for i in 0..n {
                a[(n + i, i)] = c(-psi, 0.0);
            }
        }
        ObjectiveKind::Terminal => a[(2 * n - 1, n - 1)] = c(-1.0, 0.0),
    }
    let mut p = a.clone();
    p[(0, n - 1)] -= c(alpha * phi, 0.0);
    p[(2 * n - 1, n)] -= c(alpha * phi, 0.0);
    if objective == ObjectiveKind::Terminal {
        p[(2 * n - 1, n - 1)] = c(0.0, 0.0);
    }
    let r = a.sub(&p)?;
    Ok((p, r))
}

fn ordered(pair: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let (a, b) = pair;
    let key = |z: Complex64| (z.im, z.re);
    if key(b) > key(a) {
        (b, a)
    } else {
        (a, b)
    }
}

/// Dense brute force: LU-solve `P⁻¹R` and read its two non-zero eigenvalues off
/// power traces. Order: larger imaginary part first, then larger real part.
pub fn oracle_preconditioned_spectrum(
    m: &ModeParams,
    alpha: f64,
    n: usize,
    objective: ObjectiveKind,
) -> Result<(Complex64, Complex64)> {
    if n > ORACLE_MAX_ORDER {
        return Err(Error::InvalidParameter("dense oracle limited to 200 time blocks"));
    }
    let (p, r) = scalar_mode_matrices(m, alpha, n, objective)?;
    let lu = lu_factor(&p)?;
    let pr = lu.solve_matrix(&r)?;
    rank2_eigs_from_traces(&pr).map(ordered)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRecord {
    pub mode: ModeParams,
    pub theta1: Complex64,
    pub theta2: Complex64,
    pub status: SemidiskStatus,
    /// `0 < φ < 1` (and, for tracking, more than three blocks).
    pub in_theory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub objective: ObjectiveKind,
    pub alpha: f64,
    /// `L̂` for tracking, `L` for terminal
    pub blocks: usize,
    pub records: Vec<ModeRecord>,
}

impl SpectrumReport {
    pub fn max_distance_from_half(&self) -> f64 {
        self.thetas().map(|t| (t - c(0.5, 0.0)).norm()).fold(0.0, f64::max)
    }

    pub fn min_real_part(&self) -> f64 {
        self.thetas().map(|t| t.re).fold(f64::INFINITY, f64::min)
    }

    pub fn all_contained(&self) -> bool {
        self.records.iter().all(|r| r.status.contained())
    }

    fn thetas(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.records.iter().flat_map(|r| [r.theta1, r.theta2])
    }
}

fn worst(a: SemidiskStatus, b: SemidiskStatus) -> SemidiskStatus {
    use SemidiskStatus::*;
    match (a, b) {
        (Outside, _) | (_, Outside) => Outside,
        (Boundary, _) | (_, Boundary) => Boundary,
        _ => Inside,
    }
}

fn sigma_source<'a>(p: &'a ControlProblem, sigma: Option<&'a [f64]>) -> Result<&'a [f64]> {
    match sigma {
        Some(s) => Ok(s),
        None if p.operator().is_self_adjoint() => p
            .operator()
            .spectrum()
            .ok_or(Error::MissingData("spatial eigenvalues (supply a sigma list)")),
        None => Err(Error::MissingData("spatial eigenvalues of a non-self-adjoint operator")),
    }
}

/// `θ = 1 + ω` for every spatial eigenvalue of a tracking problem.
pub fn tracking_thetas(p: &ControlProblem, sigma: Option<&[f64]>, alpha: f64) -> Result<SpectrumReport> {
    if p.kind() != ObjectiveKind::Tracking {
        return Err(Error::InvalidParameter("tracking spectrum needs a tracking problem"));
    }
    check_unit_alpha(alpha)?;
    let sig = sigma_source(p, sigma)?;
    let n = p.time_blocks();
    let records = sig
        .iter()
        .map(|&s| {
            let mode = ModeParams::for_tracking(s, p.tau(), p.gamma())?;
            let (w1, w2) = tracking_omega_raw(&mode, alpha, n)?;
            let (t1, t2) = (w1 + 1.0, w2 + 1.0);
            Ok(ModeRecord {
                mode,
                theta1: t1,
                theta2: t2,
                status: worst(semidisk_check(t1, SEMIDISK_TOL), semidisk_check(t2, SEMIDISK_TOL)),
                in_theory: mode.in_theory_domain() && check_tracking_theory(&mode, n).is_ok(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport {
        objective: ObjectiveKind::Tracking,
        alpha,
        blocks: n,
        records,
    })
}

/// `θ = 1 + ω` from the reduced `2 × 2` matrix for every spatial eigenvalue.
pub fn terminal_thetas(p: &ControlProblem, sigma: Option<&[f64]>, alpha: f64) -> Result<SpectrumReport> {
    if p.kind() != ObjectiveKind::Terminal {
        return Err(Error::InvalidParameter("terminal spectrum needs a terminal problem"));
    }
    let sig = sigma_source(p, sigma)?;
    let l = p.time_blocks();
    let records = sig
        .iter()
        .map(|&s| {
            let mode = ModeParams::for_terminal(s, p.tau(), p.gamma())?;
            let (w1, w2) = terminal_omega(&mode, alpha, l)?;
            let (t1, t2) = (w1 + 1.0, w2 + 1.0);
            Ok(ModeRecord {
                mode,
                theta1: t1,
                theta2: t2,
                status: worst(semidisk_check(t1, SEMIDISK_TOL), semidisk_check(t2, SEMIDISK_TOL)),
                in_theory: mode.in_theory_domain() && l > 3,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport {
        objective: ObjectiveKind::Terminal,
        alpha,
        blocks: l,
        records,
    })
}

/// Spectrum report for either objective.
pub fn spectrum_report(p: &ControlProblem, sigma: Option<&[f64]>, alpha: f64) -> Result<SpectrumReport> {
    match p.kind() {
        ObjectiveKind::Tracking => tracking_thetas(p, sigma, alpha),
        ObjectiveKind::Terminal => terminal_thetas(p, sigma, alpha),
    }
}
