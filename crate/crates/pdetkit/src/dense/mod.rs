//! From-scratch dense kernels with deterministic MAC counting.
//!
//! No external numerical libraries back these routines; every inner loop
//! charges its [`crate::counter::OpCounter`] category with the exact number
//! of multiply-accumulate operations it executes.

pub mod factor;
pub mod orth;
pub mod product;
pub mod random;

pub use factor::{
    cholesky, invert_lu, logdet_lu, logdet_triangular_chol, logdet_triangular_lu,
    lu_partial_pivot, solve_triangular, CholFactor, LuFactors, TriangleSide,
};
pub use orth::{complement_basis, gram_schmidt};
pub use product::{gemm, gramian, gramian_pair, GramianMode};
pub use random::{
    gaussian_matrix, random_ep, random_indefinite, random_orthogonal, random_spd, random_spsd,
};
