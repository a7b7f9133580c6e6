//! Dense complex linear algebra for small Hermitian problems.

mod eigen;
mod matrix;

pub use eigen::{
    eig_hermitian, eig_hermitian_tol, mat_fn, partial_trace, tensor, trace_norm, Spectrum,
    HERMITIAN_TOL,
};
pub use matrix::ComplexMatrix;
