//! Counted matrix products: general GEMM and Gramian products with an
//! optional symmetric half-product mode.

use crate::counter::{Kernel, OpCounter};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Gramian cost mode: `Half` computes one triangle and mirrors it (charge
/// `n p^2 / 2`), `Full` computes every entry (charge `n p^2`). Half mode is
/// only valid when the product is symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramianMode {
    Half,
    Full,
}

/// General product `A B`, charged to `Kernel::Gemm` at one MAC per
/// multiply-add (`m * k * n` total).
pub fn gemm(a: &DenseMatrix, b: &DenseMatrix, counter: &mut OpCounter) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "gemm: {}x{} * {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    counter.add(
        Kernel::Gemm,
        a.rows() as u64 * a.cols() as u64 * b.cols() as u64,
    );
    Ok(a.matmul(b))
}

/// Gramian `X^T X` for `X` (n x p), exactly symmetric by construction.
///
/// Charges `Kernel::Gramian` with `n p^2` in full mode and `n p^2 / 2` in
/// half mode, the selectable cost factor of the complexity model.
pub fn gramian(x: &DenseMatrix, counter: &mut OpCounter, mode: GramianMode) -> DenseMatrix {
    gramian_product(x, x, counter, mode)
}

/// Gramian-shaped product `X^T Y` for equal-shape `X`, `Y` (n x p).
///
/// In half mode only the upper triangle is computed and mirrored, which is
/// valid when the result is known symmetric (e.g. `U^T (A U)` for symmetric
/// `A`). Charged like [`gramian`].
pub fn gramian_pair(
    x: &DenseMatrix,
    y: &DenseMatrix,
    counter: &mut OpCounter,
    mode: GramianMode,
) -> Result<DenseMatrix> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::ShapeMismatch(format!(
            "gramian_pair: {}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(gramian_product(x, y, counter, mode))
}

fn gramian_product(
    x: &DenseMatrix,
    y: &DenseMatrix,
    counter: &mut OpCounter,
    mode: GramianMode,
) -> DenseMatrix {
    let n = x.rows();
    let p = x.cols();
    let charge = match mode {
        GramianMode::Full => (n * p * p) as u64,
        GramianMode::Half => (n * p * p) as u64 / 2,
    };
    counter.add(Kernel::Gramian, charge);

    let mut out = DenseMatrix::zeros(p, p);
    match mode {
        GramianMode::Full => {
            for k in 0..n {
                let xr = x.row(k);
                let yr = y.row(k);
                for i in 0..p {
                    let xi = xr[i];
                    if xi == 0.0 {
                        continue;
                    }
                    for j in 0..p {
                        let v = out.at(i, j) + xi * yr[j];
                        out.set(i, j, v);
                    }
                }
            }
        }
        GramianMode::Half => {
            for k in 0..n {
                let xr = x.row(k);
                let yr = y.row(k);
                for i in 0..p {
                    let xi = xr[i];
                    if xi == 0.0 {
                        continue;
                    }
                    for j in i..p {
                        let v = out.at(i, j) + xi * yr[j];
                        out.set(i, j, v);
                    }
                }
            }
            for i in 0..p {
                for j in 0..i {
                    let v = out.at(j, i);
                    out.set(i, j, v);
                }
            }
        }
    }
    out
}
