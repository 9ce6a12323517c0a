//! Cholesky and partially-pivoted LU factorizations with exact MAC counting,
//! triangular solves, and signed log-determinants of triangular factors.

use crate::counter::{Kernel, OpCounter};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SignedLogDet};
use crate::tol::{PIVOT_TOL, RANK_TOL, SYM_TOL};

/// Lower-triangular Cholesky factor `L` with `L L^T = A`.
#[derive(Clone, Debug)]
pub struct CholFactor {
    l: DenseMatrix,
    n: usize,
}

impl CholFactor {
    pub fn l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `sum_i log L_ii`; the factor of an SPD matrix has strictly positive
    /// diagonals, so the sign is always +1 and `logdet(A) = 2 * logdet_factor`.
    pub fn logdet_factor(&self) -> f64 {
        (0..self.n).map(|i| self.l.at(i, i).ln()).sum()
    }
}

/// Doolittle LU factors of `P A = L U` with the permutation stored as a row
/// index array and its parity.
#[derive(Clone, Debug)]
pub struct LuFactors {
    l: DenseMatrix,
    u: DenseMatrix,
    perm: Vec<usize>,
    parity: i8,
    singular_to_tol: bool,
}

impl LuFactors {
    pub fn l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn parity(&self) -> i8 {
        self.parity
    }

    /// True when some pivot fell below the relative rank tolerance.
    pub fn singular_to_tol(&self) -> bool {
        self.singular_to_tol
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Charges `Kernel::Cholesky` with the exact inner-loop MAC count,
/// `n(n^2-1)/6` in total. Fails with [`Error::NotSymmetric`] when the input
/// violates the relative-asymmetry tolerance and [`Error::NotSpd`] when a
/// pivot falls below `PIVOT_TOL * max_i |A_ii|`.
pub fn cholesky(a: &DenseMatrix, counter: &mut OpCounter) -> Result<CholFactor> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > SYM_TOL {
        return Err(Error::NotSymmetric { asym });
    }
    let n = a.rows();
    let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(a.at(i, i).abs()));
    let pivot_floor = PIVOT_TOL * max_diag;

    let mut l = DenseMatrix::zeros(n, n);
    let mut macs: u64 = 0;
    for j in 0..n {
        for i in j..n {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            macs += j as u64;
            if i == j {
                if s <= pivot_floor {
                    counter.add(Kernel::Cholesky, macs);
                    return Err(Error::NotSpd { step: j, pivot: s });
                }
                l.set(j, j, s.sqrt());
            } else {
                l.set(i, j, s / l.at(j, j));
            }
        }
    }
    counter.add(Kernel::Cholesky, macs);
    Ok(CholFactor { l, n })
}

/// LU factorization with partial pivoting (Doolittle normalization, unit
/// diagonal on `L`).
///
/// Rows are pivoted through an index array; the storage of `A`'s rows is
/// never swapped during elimination. Charges `Kernel::Lu` with the exact
/// inner-loop MAC count, `(n-1)n(2n-1)/6` in total when no pivot vanishes.
/// A pivot below `RANK_TOL * max|A|` marks the factorization singular to
/// tolerance; the factors are still returned.
pub fn lu_partial_pivot(a: &DenseMatrix, counter: &mut OpCounter) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "lu needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let amax = a.max_abs();
    let floor = RANK_TOL * amax;

    let mut w = a.clone();
    // piv[i] = physical row currently holding logical row i
    let mut piv: Vec<usize> = (0..n).collect();
    let mut parity: i8 = 1;
    let mut singular = false;
    let mut macs: u64 = 0;

    for k in 0..n {
        let mut imax = k;
        let mut vmax = w.at(piv[k], k).abs();
        for i in (k + 1)..n {
            let v = w.at(piv[i], k).abs();
            if v > vmax {
                vmax = v;
                imax = i;
            }
        }
        if imax != k {
            piv.swap(k, imax);
            parity = -parity;
        }
        let pk = piv[k];
        let pivot = w.at(pk, k);
        if pivot.abs() <= floor {
            singular = true;
        }
        if pivot == 0.0 {
            continue;
        }
        for i in (k + 1)..n {
            let pi = piv[i];
            let lik = w.at(pi, k) / pivot;
            w.set(pi, k, lik);
            if lik != 0.0 {
                for j in (k + 1)..n {
                    let v = w.at(pi, j) - lik * w.at(pk, j);
                    w.set(pi, j, v);
                }
                macs += (n - k - 1) as u64;
            }
        }
    }
    counter.add(Kernel::Lu, macs);

    let mut l = DenseMatrix::identity(n);
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let src = piv[i];
        for j in 0..i.min(n) {
            l.set(i, j, w.at(src, j));
        }
        for j in i..n {
            u.set(i, j, w.at(src, j));
        }
    }

    Ok(LuFactors {
        l,
        u,
        perm: piv,
        parity,
        singular_to_tol: singular,
    })
}

/// Which triangle of `T` carries the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleSide {
    Lower,
    Upper,
}

/// Solve `T Z = B` for triangular `T` (n x n) and `B` (n x p).
///
/// Charges `Kernel::Trsm` with the exact substitution MAC count,
/// `n(n-1)/2 * p`. Fails with [`Error::ZeroDiagonal`] when a diagonal entry
/// falls below `RANK_TOL * max|T|`.
pub fn solve_triangular(
    t: &DenseMatrix,
    b: &DenseMatrix,
    side: TriangleSide,
    counter: &mut OpCounter,
) -> Result<DenseMatrix> {
    if !t.is_square() || t.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "triangular solve: T is {}x{}, B is {}x{}",
            t.rows(),
            t.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = t.rows();
    let p = b.cols();
    let floor = RANK_TOL * t.max_abs();
    for i in 0..n {
        if t.at(i, i).abs() <= floor {
            return Err(Error::ZeroDiagonal { index: i });
        }
    }

    let mut z = b.clone();
    let mut macs: u64 = 0;
    match side {
        TriangleSide::Lower => {
            for i in 0..n {
                for k in 0..i {
                    let tik = t.at(i, k);
                    if tik == 0.0 {
                        continue;
                    }
                    // z[i][..] -= tik * z[k][..], one MAC per column
                    let (zk, zi) = split_rows(&mut z, k, i, p);
                    for j in 0..p {
                        zi[j] -= tik * zk[j];
                    }
                    macs += p as u64;
                }
                let d = t.at(i, i);
                for j in 0..p {
                    let v = z.at(i, j) / d;
                    z.set(i, j, v);
                }
            }
        }
        TriangleSide::Upper => {
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let tik = t.at(i, k);
                    if tik == 0.0 {
                        continue;
                    }
                    let (zi, zk) = split_rows(&mut z, i, k, p);
                    for j in 0..p {
                        zi[j] -= tik * zk[j];
                    }
                    macs += p as u64;
                }
                let d = t.at(i, i);
                for j in 0..p {
                    let v = z.at(i, j) / d;
                    z.set(i, j, v);
                }
            }
        }
    }
    counter.add(Kernel::Trsm, macs);
    Ok(z)
}

/// Disjoint mutable views of rows `lo` and `hi`, `lo < hi`, first `p` entries.
fn split_rows(m: &mut DenseMatrix, lo: usize, hi: usize, p: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(lo < hi);
    let cols = m.cols();
    let (head, tail) = m.data_mut().split_at_mut(hi * cols);
    (&mut head[lo * cols..lo * cols + p], &mut tail[..p])
}

/// Signed log-determinant of a factorization's triangular matrix.
///
/// For a Cholesky factor this is `(+1, sum_i log L_ii)`; the caller doubles
/// it to recover `logdet(A)`. For LU factors the sign combines the
/// permutation parity with the count of negative diagonals of `U`, and the
/// magnitude is `sum_i log |U_ii|`. Any diagonal below the relative rank
/// tolerance collapses the result to sign 0.
pub fn logdet_triangular_chol(f: &CholFactor) -> SignedLogDet {
    let n = f.n();
    let floor = RANK_TOL * f.l().max_abs();
    let mut logabs = 0.0;
    for i in 0..n {
        let d = f.l().at(i, i);
        if d.abs() <= floor {
            return SignedLogDet::zero();
        }
        logabs += d.ln();
    }
    SignedLogDet::new(1, logabs)
}

/// LU counterpart of [`logdet_triangular_chol`]; this is the full signed
/// `logdet(A)` since `det(L) = 1`.
pub fn logdet_triangular_lu(f: &LuFactors) -> SignedLogDet {
    let n = f.n();
    let floor = RANK_TOL * f.u().max_abs();
    let mut logabs = 0.0;
    let mut sign = f.parity();
    for i in 0..n {
        let d = f.u().at(i, i);
        if d.abs() <= floor {
            return SignedLogDet::zero();
        }
        if d < 0.0 {
            sign = -sign;
        }
        logabs += d.abs().ln();
    }
    SignedLogDet::new(sign, logabs)
}

/// Signed log-determinant of a square matrix by LU (uncounted convenience
/// used by the identity modules).
pub fn logdet_lu(a: &DenseMatrix) -> Result<SignedLogDet> {
    let mut scratch = OpCounter::new();
    let f = lu_partial_pivot(a, &mut scratch)?;
    Ok(logdet_triangular_lu(&f))
}

/// Inverse of a square matrix by LU solves against the identity.
pub fn invert_lu(a: &DenseMatrix, counter: &mut OpCounter) -> Result<DenseMatrix> {
    let n = a.rows();
    let f = lu_partial_pivot(a, counter)?;
    if f.singular_to_tol() {
        return Err(Error::SingularToTolerance {
            step: 0,
            pivot: 0.0,
        });
    }
    let pb = DenseMatrix::identity(n).permuted_rows(f.perm());
    let z = solve_triangular(f.l(), &pb, TriangleSide::Lower, counter)?;
    solve_triangular(f.u(), &z, TriangleSide::Upper, counter)
}
