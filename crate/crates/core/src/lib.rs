//! Matrix-free ParaDiag solvers for linear-quadratic optimal control of parabolic PDEs.
//!
//! The crate covers both objective kinds:
//!
//! * **tracking** — the state follows a target trajectory; preconditioned by an
//!   alpha-circulant block matrix with `|α| = 1` (default `α = −1`),
//! * **terminal cost** — only the final state is penalised; preconditioned by a
//!   block-triangular alpha-circulant matrix with small real `α` (default `1e-4`).
//!
//! Both preconditioners are applied through a Fourier transform across the time
//! index followed by independent per-frequency spatial solves. The outer solver is a
//! left-preconditioned full GMRES. The [`spectra`] module evaluates the closed-form
//! eigenvalues of the preconditioned systems and the dense brute-force oracle that
//! checks them.
//!
//! The crate is `no_std` (it needs `alloc`); the `parallel` feature runs the
//! per-frequency solves on a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod allatonce;
pub mod assembly;
mod error;
pub mod krylov;
pub mod numkit;
pub mod precond;
pub mod solve;
pub mod spatial;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;
