//! Gram-Schmidt orthonormalization and randomized orthonormal complement
//! bases.
//!
//! Both routines use modified Gram-Schmidt with one re-orthogonalization
//! pass, which holds `max |Q^T Q - I|` near machine precision. The two
//! projection passes cost `2np^2` MACs at leading order, matching the
//! complexity model's Gram-Schmidt charge directly.

use crate::counter::{Kernel, OpCounter};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::Rng;
use crate::tol::{MAX_COMPLEMENT_RETRIES, RANK_TOL};

/// Orthonormalize the columns of `X` (n x p, full column rank to tolerance).
///
/// Returns `X'` with orthonormal columns spanning `im(X)`. Fails with
/// [`Error::RankDeficient`] when a column's norm after projection drops
/// below `RANK_TOL * max|X|`.
pub fn gram_schmidt(x: &DenseMatrix, counter: &mut OpCounter) -> Result<DenseMatrix> {
    let n = x.rows();
    let p = x.cols();
    let floor = RANK_TOL * x.max_abs();

    // work on columns stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| x.col_to_vec(j)).collect();
    let mut macs: u64 = 0;
    for j in 0..p {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let qi = &head[i];
                let qj = &mut tail[0];
                let r: f64 = qi.iter().zip(qj.iter()).map(|(a, b)| a * b).sum();
                for (b, a) in qj.iter_mut().zip(qi.iter()) {
                    *b -= r * a;
                }
                macs += 2 * n as u64;
            }
        }
        let norm: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        macs += n as u64;
        if norm <= floor {
            counter.add(Kernel::GramSchmidt, macs);
            return Err(Error::RankDeficient { col: j });
        }
        let inv = 1.0 / norm;
        for v in cols[j].iter_mut() {
            *v *= inv;
        }
        macs += n as u64;
    }
    counter.add(Kernel::GramSchmidt, macs);

    Ok(DenseMatrix::from_fn(n, p, |i, j| cols[j][i]))
}

/// Orthonormal basis of the complement of `im(Xorth)`.
///
/// `Xorth` must have orthonormal columns. Random Gaussian columns are
/// orthonormalized against `Xorth` and each other; a column whose projection
/// collapses is redrawn from the same stream (up to a retry budget), so the
/// output is deterministic in `seed`. `[Xorth, U]` is unitary to tolerance.
/// The projection passes cost `2n(n^2 - p^2)` MACs at leading order.
pub fn complement_basis(
    xorth: &DenseMatrix,
    seed: u64,
    counter: &mut OpCounter,
) -> Result<DenseMatrix> {
    let n = xorth.rows();
    let p = xorth.cols();
    if p > n {
        return Err(Error::ShapeMismatch(format!(
            "complement basis: {} columns exceed dimension {}",
            p, n
        )));
    }
    let q = n - p;
    let mut rng = Rng::from_seed_stream(seed, 0x636f6d70);
    let mut basis: Vec<Vec<f64>> = (0..p).map(|j| xorth.col_to_vec(j)).collect();
    let mut macs: u64 = 0;

    for _col in 0..q {
        let mut accepted = false;
        for _try in 0..MAX_COMPLEMENT_RETRIES {
            let mut v: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
            let scale_in: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            macs += n as u64;
            if scale_in == 0.0 {
                continue;
            }
            for _pass in 0..2 {
                for b in &basis {
                    let r: f64 = b.iter().zip(v.iter()).map(|(a, c)| a * c).sum();
                    for (c, a) in v.iter_mut().zip(b.iter()) {
                        *c -= r * a;
                    }
                    macs += 2 * n as u64;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            macs += n as u64;
            // a fresh Gaussian column should keep most of its mass outside
            // the current span; a collapsed projection means a bad draw
            if norm > 1e-8 * scale_in {
                let inv = 1.0 / norm;
                for c in v.iter_mut() {
                    *c *= inv;
                }
                macs += n as u64;
                basis.push(v);
                accepted = true;
                break;
            }
        }
        if !accepted {
            counter.add(Kernel::GramSchmidt, macs);
            return Err(Error::RankDeficient { col: basis.len() });
        }
    }
    counter.add(Kernel::GramSchmidt, macs);

    Ok(DenseMatrix::from_fn(n, q, |i, j| basis[p + j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::random::gaussian_matrix;
    use crate::tol::ORTH_TOL;

    fn orth_defect(q: &DenseMatrix) -> f64 {
        let g = q.transpose().matmul(q);
        g.sub(&DenseMatrix::identity(q.cols())).max_abs()
    }

    #[test]
    fn orthonormal_input_is_fixed_up_to_signs() {
        let x = gaussian_matrix(10, 4, 5);
        let mut c = OpCounter::new();
        let q = gram_schmidt(&x, &mut c).unwrap();
        let q2 = gram_schmidt(&q, &mut c).unwrap();
        assert!(orth_defect(&q2) < 1e-12);
        for j in 0..4 {
            let dot: f64 = (0..10).map(|i| q.at(i, j) * q2.at(i, j)).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-12, "column {j} changed span");
        }
    }

    #[test]
    fn hand_checked_2x2() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let mut c = OpCounter::new();
        let q = gram_schmidt(&x, &mut c).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q.at(i, j).abs() - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projector_matches_normal_equations() {
        let x = gaussian_matrix(64, 16, 77);
        let mut c = OpCounter::new();
        let q = gram_schmidt(&x, &mut c).unwrap();
        let proj_q = q.matmul(&q.transpose());
        // X (X^T X)^-1 X^T via LU inverse
        let xtx = x.transpose().matmul(&x);
        let inv = crate::dense::factor::invert_lu(&xtx, &mut c).unwrap();
        let proj_x = x.matmul(&inv).matmul(&x.transpose());
        let err = proj_q.sub(&proj_x).frobenius_norm() / proj_x.frobenius_norm();
        assert!(err < 1e-10, "projector mismatch {err}");
    }

    #[test]
    fn rank_deficient_column_detected() {
        let mut x = gaussian_matrix(6, 3, 8);
        for i in 0..6 {
            let v = 2.0 * x.at(i, 0);
            x.set(i, 2, v);
        }
        let mut c = OpCounter::new();
        assert!(matches!(
            gram_schmidt(&x, &mut c),
            Err(Error::RankDeficient { col: 2 })
        ));
    }

    #[test]
    fn gs_mac_count_leading_order() {
        let (n, p) = (50, 10);
        let x = gaussian_matrix(n, p, 13);
        let mut c = OpCounter::new();
        gram_schmidt(&x, &mut c).unwrap();
        let exact = (2 * 2 * n * (p * (p - 1) / 2) + 2 * n * p) as u64;
        assert_eq!(c.get(Kernel::GramSchmidt), exact);
    }

    #[test]
    fn complement_makes_square_unitary() {
        let x = gaussian_matrix(32, 8, 4);
        let mut c = OpCounter::new();
        let q = gram_schmidt(&x, &mut c).unwrap();
        let u = complement_basis(&q, 17, &mut c).unwrap();
        assert_eq!(u.cols(), 24);
        let full = q.hcat(&u);
        assert!(orth_defect(&full) < ORTH_TOL, "defect {}", orth_defect(&full));
    }

    #[test]
    fn complement_of_empty_basis_is_orthogonal_matrix() {
        let empty = DenseMatrix::zeros(5, 0);
        let mut c = OpCounter::new();
        let u = complement_basis(&empty, 2, &mut c).unwrap();
        assert_eq!(u.cols(), 5);
        assert!(orth_defect(&u) < ORTH_TOL);
    }

    #[test]
    fn complement_of_e1_in_r2() {
        let e1 = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let mut c = OpCounter::new();
        let u = complement_basis(&e1, 3, &mut c).unwrap();
        assert_eq!((u.rows(), u.cols()), (2, 1));
        assert!(u.at(0, 0).abs() < 1e-12);
        assert!((u.at(1, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_deterministic_in_seed() {
        let x = gaussian_matrix(12, 3, 6);
        let mut c = OpCounter::new();
        let q = gram_schmidt(&x, &mut c).unwrap();
        let u1 = complement_basis(&q, 42, &mut c).unwrap();
        let u2 = complement_basis(&q, 42, &mut c).unwrap();
        assert_eq!(u1, u2);
        let u3 = complement_basis(&q, 43, &mut c).unwrap();
        assert_ne!(u1, u3);
    }
}
