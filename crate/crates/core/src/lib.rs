//! Dense matrix inversion by Schultz-type iterations.
//!
//! The main engine, [`solver::run`] with [`Method::Sshp2`], re-optimizes the two
//! coefficients of a quadratic residual polynomial on every step so that the
//! Frobenius norm of `I - A X_{k+1}` is as small as possible. The classical
//! Schultz iteration ([`Method::Hp2`]) and the third-order hyper-power
//! iteration ([`Method::Hp3`]) are provided as baselines.
//!
//! The [`oracle`] module is an independent verification path built on a
//! Jacobi eigensolver and the eigenvalue form of the coefficient formulas.
//!
//! With the default `parallel` feature, large matrix products and batch
//! solves run on the rayon thread pool. Results are bit-identical with and
//! without the feature.

pub mod coeff;
pub mod dense;
pub mod error;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod sweep;

pub use coeff::{CoefficientResult, DenomMode, DenomTolerance, GramSystem};
pub use dense::{AnyMatrix, ComplexMatrix, Matrix, RealMatrix};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use solver::{IterationRecord, Method, SolveReport, SolverConfig, StopReason};

pub use num_complex::Complex64;
