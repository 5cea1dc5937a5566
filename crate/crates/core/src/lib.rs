//! Krylov solvers with optional stabilized step policies, plus the dense and
//! sparse kernels, test-matrix generators and Matrix Market IO they need.

pub mod krylov;
pub mod linalg;
pub mod matgen;
pub mod mmio;
pub mod rng;
pub mod stabilize;

pub use krylov::{
    krylov_solve, Method, Preconditioner, PreconditionerKind, SolveError, SolveOptions,
    SolveReport, Termination,
};
pub use stabilize::StepPolicy;
