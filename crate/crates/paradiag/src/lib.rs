//! Experiment driver for the all-at-once optimal-control solvers in `paradiag-core`:
//! single solves, analytic spectrum reports, weak-scaling sweeps, and a self-check.

pub mod config;
pub mod data;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{Equation, Overrides, RunConfig, ScaleMode};
pub use run::{run_solve, run_spectrum, run_sweep, SolveRecord, SweepParam, SweepSpec, SweepTable};
pub use validate::{run_validate, ValidationReport};
