//! Dense linear algebra, arbitrary-length DFT and the rank-2 trace eigen-extractor.

mod dense;
mod dft;
mod scalar;
mod traces;

pub use dense::{lu_factor, lu_solve, DenseMatrix, LuFactors, PIVOT_THRESHOLD};
pub use dft::{dft, Dft2Plan, DftPlan, Direction, DIRECT_THRESHOLD};
pub use scalar::{axpy, dot, imag_ratio, norm2, Scalar};
pub use traces::{
    quadratic_roots, rank2_eigs_from_traces, rank2_eigs_from_traces_real, TRACE_CONSISTENCY_TOL,
};
