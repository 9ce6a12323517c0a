//! Central numerical tolerances.
//!
//! Every threshold used by the kernels and identity checks is defined here
//! rather than inline, so the acceptance suites and the library agree on a
//! single set of values.

/// Orthonormality target for Gram-Schmidt outputs: `max |Q^T Q - I|`.
pub const ORTH_TOL: f64 = 1e-10;

/// Relative rank / singularity threshold (scaled by the max-abs entry of the
/// matrix at hand).
pub const RANK_TOL: f64 = 1e-12;

/// Relative Frobenius asymmetry allowed before a matrix is rejected as
/// non-symmetric.
pub const SYM_TOL: f64 = 1e-10;

/// Cholesky pivot threshold, relative to the largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-13;

/// EP (range-Hermitian) commutator threshold:
/// `||A A^+ - A^+ A||_F < EP_TOL * (1 + ||A A^+||_F)`.
pub const EP_TOL: f64 = 1e-8;

/// Default relative truncation for oracle rank / pseudo-inverse /
/// pseudo-determinant decisions.
pub const ORACLE_RTOL: f64 = 1e-10;

/// Largest dimension the slow oracle routines accept.
pub const ORACLE_MAX_N: usize = 256;

/// Retry budget for the randomized complement-basis construction.
pub const MAX_COMPLEMENT_RETRIES: usize = 50;
