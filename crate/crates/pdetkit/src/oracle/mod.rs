//! Slow, independent reference routines: Jacobi eigendecomposition,
//! one-sided Jacobi SVD, Schur-based eigenvalues, pseudo-inverse,
//! pseudo-determinant and numerical rank.
//!
//! These back the validation of the identity modules at small sizes and are
//! never used inside a counted production path.

pub mod jacobi;
pub mod schur;

pub use jacobi::{jacobi_eigen, jacobi_svd, EigenDecomp, SVDecomp};
pub use schur::eigenvalues as schur_eigenvalues;

use crate::error::Result;
use crate::matrix::{DenseMatrix, SignedLogDet};
use crate::tol::SYM_TOL;

/// Moore-Penrose pseudo-inverse via SVD with relative truncation of
/// singular values at `rtol * sigma_max`.
pub fn pinv_oracle(a: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    pinv_with_floor(a, rtol, 0.0)
}

/// Pseudo-inverse with an additional absolute truncation floor, for
/// matrices assembled by cancellation whose own largest singular value may
/// be pure roundoff.
pub fn pinv_with_floor(a: &DenseMatrix, rtol: f64, abs_floor: f64) -> Result<DenseMatrix> {
    let svd = jacobi_svd(a)?;
    let smax = svd.s().first().copied().unwrap_or(0.0);
    let floor = (rtol * smax).max(abs_floor);
    let k = svd.s().len();
    // V * S^+ * U^T
    let vs = DenseMatrix::from_fn(a.cols(), k, |i, j| {
        if svd.s()[j] > floor && svd.s()[j] > 0.0 {
            svd.v().at(i, j) / svd.s()[j]
        } else {
            0.0
        }
    });
    Ok(vs.matmul(&svd.u().transpose()))
}

/// Numerical rank: count of singular values above `rtol * sigma_max`.
pub fn rank_oracle(a: &DenseMatrix, rtol: f64) -> Result<usize> {
    rank_with_floor(a, rtol, 0.0)
}

/// Rank with an additional absolute floor (see [`pinv_with_floor`]).
pub fn rank_with_floor(a: &DenseMatrix, rtol: f64, abs_floor: f64) -> Result<usize> {
    let svd = jacobi_svd(a)?;
    let smax = svd.s().first().copied().unwrap_or(0.0);
    if smax <= abs_floor {
        return Ok(0);
    }
    let floor = (rtol * smax).max(abs_floor);
    Ok(svd.s().iter().filter(|s| **s > floor).count())
}

/// Pseudo-determinant: signed product of the nonzero eigenvalues, 1 for
/// nilpotent matrices. Symmetric inputs go through the Jacobi
/// eigendecomposition; general square inputs through the Schur route, where
/// complex-conjugate pairs contribute their positive modulus squared.
pub fn pdet_oracle(a: &DenseMatrix, rtol: f64) -> Result<SignedLogDet> {
    let eig: Vec<(f64, f64)> = if a.is_symmetric_within(SYM_TOL) {
        jacobi_eigen(a)?
            .values()
            .iter()
            .map(|&l| (l, 0.0))
            .collect()
    } else {
        schur_eigenvalues(a)?
    };
    let max_mod = eig
        .iter()
        .map(|(re, im)| (re * re + im * im).sqrt())
        .fold(0.0_f64, f64::max);
    if max_mod == 0.0 {
        return Ok(SignedLogDet::one());
    }
    let floor = rtol * max_mod;
    let mut sign = 1i8;
    let mut logabs = 0.0;
    let mut any = false;
    for (re, im) in &eig {
        let modulus = (re * re + im * im).sqrt();
        if modulus <= floor {
            continue;
        }
        any = true;
        logabs += modulus.ln();
        if *im == 0.0 && *re < 0.0 {
            sign = -sign;
        }
    }
    if !any {
        return Ok(SignedLogDet::one());
    }
    Ok(SignedLogDet::new(sign, logabs))
}

/// Orthonormal basis of the kernel of `a` (right singular vectors whose
/// singular values fall at or below `rtol * sigma_max`).
pub fn null_space_basis(a: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    let svd = jacobi_svd(a)?;
    let smax = svd.s().first().copied().unwrap_or(0.0);
    let floor = rtol * smax;
    let keep: Vec<usize> = (0..svd.s().len())
        .filter(|&j| smax == 0.0 || svd.s()[j] <= floor)
        .collect();
    let mut basis = DenseMatrix::from_fn(a.cols(), keep.len(), |i, j| svd.v().at(i, keep[j]));
    // the thin SVD only carries min(m, n) right vectors; complete for wide inputs
    if a.rows() < a.cols() {
        let missing = a.cols() - a.rows();
        let mut scratch = crate::counter::OpCounter::new();
        let range = DenseMatrix::from_fn(a.cols(), svd.s().len(), |i, j| svd.v().at(i, j));
        let extra = crate::dense::complement_basis(&range, 0x6e756c6c, &mut scratch)?;
        debug_assert_eq!(extra.cols(), missing);
        basis = basis.hcat(&extra);
    }
    Ok(basis)
}

/// Orthonormal basis of the cokernel of `a` (left singular vectors whose
/// singular values fall at or below `rtol * sigma_max`).
pub fn conull_space_basis(a: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    null_space_basis(&a.transpose(), rtol)
}

/// Orthonormal basis of the range of `a`.
pub fn range_basis(a: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    let svd = jacobi_svd(a)?;
    let smax = svd.s().first().copied().unwrap_or(0.0);
    let floor = rtol * smax;
    let keep: Vec<usize> = (0..svd.s().len())
        .filter(|&j| smax > 0.0 && svd.s()[j] > floor)
        .collect();
    Ok(DenseMatrix::from_fn(a.rows(), keep.len(), |i, j| {
        svd.u().at(i, keep[j])
    }))
}

/// `dim(im(B1) ∩ im(B2))` for bases `B1`, `B2` of subspaces of the same
/// ambient space: `dim V + dim W - dim(V + W)`.
pub fn intersection_dim(b1: &DenseMatrix, b2: &DenseMatrix, rtol: f64) -> Result<usize> {
    let d1 = rank_oracle(b1, rtol)?;
    let d2 = rank_oracle(b2, rtol)?;
    if b1.cols() == 0 || b2.cols() == 0 {
        return Ok(0);
    }
    let sum = rank_oracle(&b1.hcat(b2), rtol)?;
    Ok(d1 + d2 - sum)
}
