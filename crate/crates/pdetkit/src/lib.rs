//! Dense linear-algebra toolkit built around a rank-deficient Woodbury-type
//! matrix: generalized-inverse and pseudo-determinant identities, three
//! instrumented log-determinant algorithms with an analytic complexity
//! model, and a Gaussian-process likelihood layer, plus benchmark and
//! verification harnesses for the `pdetkit` CLI.
//!
//! The dense kernels are written from scratch and count multiply-accumulate
//! operations deterministically, so benchmark CSVs are reproducible
//! bit-for-bit across platforms (timing columns aside).

pub mod bench;
pub mod counter;
pub mod dense;
pub mod error;
pub mod geninv;
pub mod gp;
pub mod io;
pub mod logdet;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod tol;
pub mod verify;

pub use counter::{Kernel, OpCounter};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SignedLogDet};
