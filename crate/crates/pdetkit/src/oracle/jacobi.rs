//! Cyclic Jacobi eigendecomposition and one-sided Jacobi SVD.
//!
//! Slow, robust reference routines for validating the identity modules at
//! small sizes; never part of a production path.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::tol::{ORACLE_MAX_N, SYM_TOL};

/// Eigendecomposition of a symmetric matrix: values descending, orthonormal
/// vectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    values: Vec<f64>,
    vectors: DenseMatrix,
}

impl EigenDecomp {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }
}

/// Thin SVD `A = U diag(S) V^T`: `S` non-negative descending, `U` and `V`
/// with orthonormal columns (completed on the kernel so both stay
/// orthonormal for rank-deficient inputs).
#[derive(Clone, Debug)]
pub struct SVDecomp {
    u: DenseMatrix,
    s: Vec<f64>,
    v: DenseMatrix,
}

impl SVDecomp {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }
}

/// Cyclic Jacobi sweeps until the off-diagonal Frobenius mass drops below
/// `1e-13 * ||A||_F`.
pub fn jacobi_eigen(a: &DenseMatrix) -> Result<EigenDecomp> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: ORACLE_MAX_N,
        });
    }
    let asym = a.asymmetry();
    if asym > SYM_TOL {
        return Err(Error::NotSymmetric { asym });
    }

    let norm = a.frobenius_norm();
    let target = 1e-13 * norm;
    let mut w = a.symmetrized();
    let mut v = DenseMatrix::identity(n);

    for _sweep in 0..100 {
        if off_diagonal_norm(&w) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = w.at(p, p);
                let aqq = w.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate_symmetric(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.at(j, j).partial_cmp(&w.at(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| w.at(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v.at(i, order[j]));
    Ok(EigenDecomp { values, vectors })
}

fn off_diagonal_norm(w: &DenseMatrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * w.at(i, j) * w.at(i, j);
        }
    }
    s.sqrt()
}

/// Apply the rotation J(p,q,c,s) to a symmetric matrix on both sides.
fn rotate_symmetric(w: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = w.rows();
    let app = w.at(p, p);
    let aqq = w.at(q, q);
    let apq = w.at(p, q);
    w.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    w.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    w.set(p, q, 0.0);
    w.set(q, p, 0.0);
    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let aip = w.at(i, p);
        let aiq = w.at(i, q);
        w.set(i, p, c * aip - s * aiq);
        w.set(p, i, c * aip - s * aiq);
        w.set(i, q, s * aip + c * aiq);
        w.set(q, i, s * aip + c * aiq);
    }
}

fn rotate_columns(v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = v.rows();
    for i in 0..n {
        let vip = v.at(i, p);
        let viq = v.at(i, q);
        v.set(i, p, c * vip - s * viq);
        v.set(i, q, s * vip + c * viq);
    }
}

/// One-sided Jacobi SVD: column rotations orthogonalize the working copy,
/// pair by pair, until every pair is numerically orthogonal.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<SVDecomp> {
    let (m, n) = (a.rows(), a.cols());
    if m.max(n) > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n: m.max(n),
            max: ORACLE_MAX_N,
        });
    }
    if m < n {
        let t = jacobi_svd(&a.transpose())?;
        return Ok(SVDecomp {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }

    // columns of the working copy, contiguous
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.col_to_vec(j)).collect();
    let mut v = DenseMatrix::identity(n);
    let tol = 1e-15;

    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (alpha, beta, gamma) = {
                    let wi = &w[i];
                    let wj = &w[j];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..m {
                        alpha += wi[k] * wi[k];
                        beta += wj[k] * wj[k];
                        gamma += wi[k] * wj[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (wi, wj) = pair_mut(&mut w, i, j);
                for k in 0..m {
                    let x = wi[k];
                    let y = wj[k];
                    wi[k] = c * x - s * y;
                    wj[k] = s * x + c * y;
                }
                rotate_columns(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let w: Vec<Vec<f64>> = order.iter().map(|&k| w[k].clone()).collect();
    sigma = order.iter().map(|&k| sigma[k]).collect();
    let v = DenseMatrix::from_fn(n, n, |r, c2| v.at(r, order[c2]));

    // left vectors: normalized columns where sigma > 0, orthonormal
    // completion on the kernel
    let sig_floor = sigma.first().copied().unwrap_or(0.0) * 1e-14;
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, col) in w.iter().enumerate() {
        if sigma[k] > sig_floor && sigma[k] > 0.0 {
            ucols.push(col.iter().map(|x| x / sigma[k]).collect());
        } else {
            sigma[k] = sigma[k].max(0.0);
            ucols.push(vec![0.0; m]);
        }
    }
    complete_zero_columns(&mut ucols, m);

    Ok(SVDecomp {
        u: DenseMatrix::from_fn(m, n, |r, c2| ucols[c2][r]),
        s: sigma,
        v,
    })
}

fn pair_mut(w: &mut [Vec<f64>], i: usize, j: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(i < j);
    let (head, tail) = w.split_at_mut(j);
    (&mut head[i], &mut tail[0])
}

/// Replace zero columns by unit vectors orthogonalized against everything
/// else (deterministic: tries coordinate directions in order).
fn complete_zero_columns(cols: &mut [Vec<f64>], m: usize) {
    for idx in 0..cols.len() {
        if cols[idx].iter().any(|&x| x != 0.0) {
            continue;
        }
        'candidates: for e in 0..m {
            let mut v = vec![0.0; m];
            v[e] = 1.0;
            for _pass in 0..2 {
                for (other_idx, other) in cols.iter().enumerate() {
                    if other_idx == idx {
                        continue;
                    }
                    let r: f64 = other.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    for (x, a) in v.iter_mut().zip(other.iter()) {
                        *x -= r * a;
                    }
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                cols[idx] = v;
                break 'candidates;
            }
        }
    }
}
