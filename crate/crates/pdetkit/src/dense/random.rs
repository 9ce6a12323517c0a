//! Seeded generators for test and benchmark matrices.
//!
//! All generators are deterministic in their seed: identical seeds produce
//! bit-identical matrices on every platform (see [`crate::rng`]).

use crate::counter::OpCounter;
use crate::dense::factor::lu_partial_pivot;
use crate::dense::orth::gram_schmidt;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::Rng;

/// i.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = Rng::from_seed_stream(seed, 0x6d617472);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
}

/// Random orthogonal matrix from Gram-Schmidt of a Gaussian square matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut scratch = OpCounter::new();
    for attempt in 0..8 {
        let g = gaussian_matrix(n, n, seed.wrapping_add(attempt * 0x9e37));
        if let Ok(q) = gram_schmidt(&g, &mut scratch) {
            return q;
        }
    }
    unreachable!("a Gaussian square matrix is full rank to tolerance");
}

/// Random SPD matrix `Q diag(lambda) Q^T` with eigenvalues log-uniform in
/// `[eigmin, eigmax]`, symmetrized exactly.
pub fn random_spd(n: usize, eigmin: f64, eigmax: f64, seed: u64) -> Result<DenseMatrix> {
    if !(eigmin > 0.0 && eigmin <= eigmax) {
        return Err(Error::BadParams(format!(
            "random_spd needs 0 < eigmin <= eigmax, got [{eigmin}, {eigmax}]"
        )));
    }
    let q = random_orthogonal(n, seed);
    let mut rng = Rng::from_seed_stream(seed, 0x73706431);
    let lambda: Vec<f64> = (0..n).map(|_| rng.next_log_uniform(eigmin, eigmax)).collect();
    Ok(assemble_symmetric(&q, &lambda, n))
}

/// Random symmetric positive-semidefinite matrix of the given rank
/// (eigenvalues log-uniform in `[eigmin, eigmax]` on the range, zero on the
/// kernel). Singular symmetric matrices are EP by construction.
pub fn random_spsd(
    n: usize,
    rank: usize,
    eigmin: f64,
    eigmax: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    if rank > n {
        return Err(Error::BadParams(format!("rank {rank} exceeds size {n}")));
    }
    if !(eigmin > 0.0 && eigmin <= eigmax) {
        return Err(Error::BadParams(format!(
            "random_spsd needs 0 < eigmin <= eigmax, got [{eigmin}, {eigmax}]"
        )));
    }
    let q = random_orthogonal(n, seed);
    let mut rng = Rng::from_seed_stream(seed, 0x73707364);
    let mut lambda = vec![0.0; n];
    for l in lambda.iter_mut().take(rank) {
        *l = rng.next_log_uniform(eigmin, eigmax);
    }
    Ok(assemble_symmetric(&q, &lambda, n))
}

/// Random symmetric indefinite nonsingular matrix: eigenvalue magnitudes
/// log-uniform in `[1/2, 2]` with random signs, at least one of each sign.
pub fn random_indefinite(n: usize, seed: u64) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::BadParams(
            "random_indefinite needs n >= 2 for mixed signs".into(),
        ));
    }
    let q = random_orthogonal(n, seed);
    let mut rng = Rng::from_seed_stream(seed, 0x696e6466);
    let mut lambda: Vec<f64> = (0..n)
        .map(|_| {
            let mag = rng.next_log_uniform(0.5, 2.0);
            if rng.next_f64() < 0.5 {
                -mag
            } else {
                mag
            }
        })
        .collect();
    if lambda.iter().all(|l| *l > 0.0) {
        lambda[0] = -lambda[0];
    }
    if lambda.iter().all(|l| *l < 0.0) {
        lambda[0] = -lambda[0];
    }
    Ok(assemble_symmetric(&q, &lambda, n))
}

/// Random EP (range-Hermitian) matrix of prescribed rank:
/// `A = Q_r C Q_r^T` with `Q_r` the leading columns of a random orthogonal
/// matrix and `C` a random nonsingular core, so `im(A) = im(A^T) = im(Q_r)`.
/// The core is generally nonsymmetric; redraws keep it comfortably
/// nonsingular.
pub fn random_ep(n: usize, rank: usize, seed: u64) -> Result<DenseMatrix> {
    if rank > n {
        return Err(Error::BadParams(format!("rank {rank} exceeds size {n}")));
    }
    let q = random_orthogonal(n, seed);
    let qr = q.leading_columns(rank);
    let core = nonsingular_core(rank, seed);
    Ok(qr.matmul(&core).matmul(&qr.transpose()))
}

fn nonsingular_core(r: usize, seed: u64) -> DenseMatrix {
    if r == 0 {
        return DenseMatrix::zeros(0, 0);
    }
    let mut scratch = OpCounter::new();
    for attempt in 0..64u64 {
        let g = gaussian_matrix(r, r, seed ^ (0xc0f3 + attempt));
        let f = match lu_partial_pivot(&g, &mut scratch) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let mut umin = f64::INFINITY;
        let mut umax = 0.0_f64;
        for i in 0..r {
            let d = f.u().at(i, i).abs();
            umin = umin.min(d);
            umax = umax.max(d);
        }
        if umin > 1e-3 * umax {
            return g;
        }
    }
    unreachable!("Gaussian cores are almost surely well conditioned");
}

fn assemble_symmetric(q: &DenseMatrix, lambda: &[f64], n: usize) -> DenseMatrix {
    let scaled = DenseMatrix::from_fn(n, n, |i, j| q.at(i, j) * lambda[j]);
    scaled.matmul(&q.transpose()).symmetrized()
}
