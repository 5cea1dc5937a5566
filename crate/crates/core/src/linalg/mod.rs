//! Matrix storage, vector kernels and the small dense factorizations the
//! solvers and experiment harness depend on.

mod csr;
mod dense;
mod eig;
mod ls2;
mod lu;
mod qr;
pub mod vector;

pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use eig::{cond2, sym_eig, EigDecomp};
pub use ls2::{solve_ls_2x2, DEFAULT_LS_REL_TOL};
pub use lu::{lu_factor, lu_solve, LuFactor};
pub use qr::householder_qr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimensions must be positive")]
    Empty,
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },
    #[error("LU factor is singular (pivot below 1e-300)")]
    Singular,
    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix has {rows} rows but QR needs rows >= cols ({cols})")]
    TooFewRows { rows: usize, cols: usize },
}

/// A real linear map `A` that can be applied forward and transposed.
///
/// The `*_into` methods do not check dimensions beyond debug assertions;
/// use [`matvec`] and [`matvec_transpose`] for checked application.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `out ← A·v`
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    /// `out ← Aᵀ·v`
    fn apply_transpose_into(&self, v: &[f64], out: &mut [f64]);

    /// Main diagonal, length `min(nrows, ncols)`.
    fn diagonal(&self) -> Vec<f64>;

    fn frobenius_norm(&self) -> f64;

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(v, &mut out);
        out
    }

    fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        self.apply_transpose_into(v, &mut out);
        out
    }
}

/// Checked `A·v`.
pub fn matvec(op: &dyn LinearOperator, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if v.len() != op.ncols() {
        return Err(LinalgError::DimensionMismatch {
            context: "matvec",
            expected: op.ncols(),
            found: v.len(),
        });
    }
    Ok(op.apply(v))
}

/// Checked `Aᵀ·v`.
pub fn matvec_transpose(op: &dyn LinearOperator, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if v.len() != op.nrows() {
        return Err(LinalgError::DimensionMismatch {
            context: "matvec_transpose",
            expected: op.nrows(),
            found: v.len(),
        });
    }
    Ok(op.apply_transpose(v))
}

/// `b − A·x`, computed from scratch.
pub fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = op.apply(x);
    vector::sub(b, &ax)
}
