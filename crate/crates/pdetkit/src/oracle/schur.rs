//! Eigenvalues of a general real square matrix: Householder reduction to
//! Hessenberg form followed by Francis double-shift QR iteration with
//! exceptional shifts. Eigenvalues only, oracle scale.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::tol::ORACLE_MAX_N;

/// All eigenvalues of `a` as `(re, im)` pairs; complex eigenvalues appear in
/// conjugate pairs. Ordering is unspecified.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
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
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    hessenberg_in_place(&mut h);
    hqr(&mut h)
}

/// Householder reduction to upper Hessenberg form, in place, without
/// accumulating the transform.
fn hessenberg_in_place(h: &mut [Vec<f64>]) {
    let n = h.len();
    if n < 3 {
        return;
    }
    for j in 0..(n - 2) {
        // reflector on h[j+1..n, j]
        let mut norm2 = 0.0;
        for i in (j + 1)..n {
            norm2 += h[i][j] * h[i][j];
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if h[j + 1][j] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in (j + 1)..n {
            v[i] = h[i][j];
        }
        v[j + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // left: H := (I - 2 v v^T / v^T v) H
        for col in 0..n {
            let mut dot = 0.0;
            for i in (j + 1)..n {
                dot += v[i] * h[i][col];
            }
            let f = 2.0 * dot / vnorm2;
            for i in (j + 1)..n {
                h[i][col] -= f * v[i];
            }
        }
        // right: H := H (I - 2 v v^T / v^T v)
        for row in 0..n {
            let mut dot = 0.0;
            for i in (j + 1)..n {
                dot += h[row][i] * v[i];
            }
            let f = 2.0 * dot / vnorm2;
            for i in (j + 1)..n {
                h[row][i] -= f * v[i];
            }
        }
        // enforce exact zeros below the subdiagonal in this column
        h[j + 1][j] = alpha;
        for i in (j + 2)..n {
            h[i][j] = 0.0;
        }
    }
}

#[inline]
fn sign_like(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (classic `hqr`).
fn hqr(h: &mut [Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let n = h.len();
    let eps = f64::EPSILON;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[i][j].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(vec![(0.0, 0.0); n]);
    }

    let mut t = 0.0;
    let mut nn = n as isize - 1;
    'outer: while nn >= 0 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 1 {
                let s = h[(l - 1) as usize][(l - 1) as usize].abs()
                    + h[l as usize][l as usize].abs();
                let s = if s == 0.0 { anorm } else { s };
                if h[l as usize][(l - 1) as usize].abs() <= eps * s {
                    h[l as usize][(l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = h[nn as usize][nn as usize];
            if l == nn {
                // one root found
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                continue 'outer;
            }
            let y = h[(nn - 1) as usize][(nn - 1) as usize];
            let w = h[nn as usize][(nn - 1) as usize] * h[(nn - 1) as usize][nn as usize];
            if l == nn - 1 {
                // two roots found
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x_shifted = x + t;
                if q >= 0.0 {
                    let z = p + sign_like(z, p);
                    wr[(nn - 1) as usize] = x_shifted + z;
                    wr[nn as usize] = if z != 0.0 {
                        x_shifted - w / z
                    } else {
                        x_shifted + z
                    };
                    wi[(nn - 1) as usize] = 0.0;
                    wi[nn as usize] = 0.0;
                } else {
                    wr[(nn - 1) as usize] = x_shifted + p;
                    wr[nn as usize] = x_shifted + p;
                    wi[(nn - 1) as usize] = -z;
                    wi[nn as usize] = z;
                }
                nn -= 2;
                continue 'outer;
            }
            if its == 60 {
                return Err(Error::BadParams(
                    "QR iteration failed to converge in 60 steps".into(),
                ));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nn as usize {
                    h[i][i] -= x;
                }
                let s = h[nn as usize][(nn - 1) as usize].abs()
                    + h[(nn - 1) as usize][(nn - 2) as usize].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // two consecutive small subdiagonal elements
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let z = h[m as usize][m as usize];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1) as usize][m as usize] + h[m as usize][(m + 1) as usize];
                q = h[(m + 1) as usize][(m + 1) as usize] - z - rr - ss;
                r = h[(m + 2) as usize][(m + 1) as usize];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[m as usize][(m - 1) as usize].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (h[(m - 1) as usize][(m - 1) as usize].abs()
                        + z.abs()
                        + h[(m + 1) as usize][(m + 1) as usize].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                h[i as usize][(i - 2) as usize] = 0.0;
                if i != m + 2 {
                    h[i as usize][(i - 3) as usize] = 0.0;
                }
            }
            // double QR step on rows l..nn, columns m..nn
            for k in m..=(nn - 1) {
                if k != m {
                    p = h[k as usize][(k - 1) as usize];
                    q = h[(k + 1) as usize][(k - 1) as usize];
                    r = if k != nn - 1 {
                        h[(k + 2) as usize][(k - 1) as usize]
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_like((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        h[k as usize][(k - 1) as usize] = -h[k as usize][(k - 1) as usize];
                    }
                } else {
                    h[k as usize][(k - 1) as usize] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                // row modification
                for j in (k as usize)..=(nn as usize) {
                    let mut pp = h[k as usize][j] + q * h[(k + 1) as usize][j];
                    if k != nn - 1 {
                        pp += r * h[(k + 2) as usize][j];
                        h[(k + 2) as usize][j] -= pp * z;
                    }
                    h[(k + 1) as usize][j] -= pp * y;
                    h[k as usize][j] -= pp * x;
                }
                // column modification
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in (l as usize)..=(mmin as usize) {
                    let mut pp = x * h[i][k as usize] + y * h[i][(k + 1) as usize];
                    if k != nn - 1 {
                        pp += z * h[i][(k + 2) as usize];
                        h[i][(k + 2) as usize] -= pp * r;
                    }
                    h[i][(k + 1) as usize] -= pp * q;
                    h[i][k as usize] -= pp;
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}
