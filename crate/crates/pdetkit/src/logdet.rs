//! The three algorithms for `logdet(A, X) = logdet(A) + logdet(X^T A^-1 X)`
//! with instrumented operation counting, plus their analytic complexity
//! model and crossover analysis.
//!
//! LD1 factorizes `A` directly; LD2 factorizes the low-rank completion
//! `N = I - P + A P`; LD3 compresses `A` onto the orthogonal complement of
//! `im(X)`. All three agree on nonsingular `A` and full-column-rank `X`.
//! Flags are caller contracts, not hints: declaring `spd` on a matrix whose
//! Cholesky pivot fails is a hard error, never a silent fallback. A factor
//! that is merely singular to tolerance propagates a sign-0 value instead.

use std::time::Instant;

use crate::counter::OpCounter;
use crate::dense::{
    cholesky, complement_basis, gemm, gram_schmidt, gramian, gramian_pair, logdet_triangular_chol,
    logdet_triangular_lu, lu_partial_pivot, random_spd, solve_triangular, CholFactor,
    GramianMode, TriangleSide,
};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SignedLogDet};
use crate::tol::ORTH_TOL;

/// Caller declarations steering the algorithm branches.
///
/// `gamma_half` selects the symmetric half-product for Gramians;
/// `delta_precomputed` declares that the complement basis for LD3 is
/// supplied by the caller and its construction must not be charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LdFlags {
    pub spd: bool,
    pub orth: bool,
    pub gamma_half: bool,
    pub delta_precomputed: bool,
}

impl Default for LdFlags {
    fn default() -> Self {
        LdFlags {
            spd: true,
            orth: false,
            gamma_half: true,
            delta_precomputed: false,
        }
    }
}

impl LdFlags {
    fn gramian_mode(&self) -> GramianMode {
        if self.gamma_half {
            GramianMode::Half
        } else {
            GramianMode::Full
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdAlgorithm {
    Ld1,
    Ld2,
    Ld3,
}

pub const ALL_ALGORITHMS: [LdAlgorithm; 3] = [LdAlgorithm::Ld1, LdAlgorithm::Ld2, LdAlgorithm::Ld3];

impl std::fmt::Display for LdAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LdAlgorithm::Ld1 => write!(f, "LD1"),
            LdAlgorithm::Ld2 => write!(f, "LD2"),
            LdAlgorithm::Ld3 => write!(f, "LD3"),
        }
    }
}

/// Outcome of one algorithm run: the signed log-determinant, the private
/// MAC counter, and the wall time of the algorithm body.
#[derive(Clone, Debug)]
pub struct LdResult {
    pub value: SignedLogDet,
    pub counter: OpCounter,
    pub wall_ns: u64,
    pub algorithm: LdAlgorithm,
}

fn check_inputs(a: &DenseMatrix, x: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "A must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if x.rows() != a.rows() || x.cols() > a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "X must be {}xp with p <= {}, got {}x{}",
            a.rows(),
            a.rows(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// `logdet(A, X)` by direct factorization of `A`.
pub fn ld1(a: &DenseMatrix, x: &DenseMatrix, flags: LdFlags) -> Result<LdResult> {
    check_inputs(a, x)?;
    let mut counter = OpCounter::new();
    let start = Instant::now();

    let value = if flags.spd {
        let la = cholesky(a, &mut counter)?;
        let y = solve_triangular(la.l(), x, TriangleSide::Lower, &mut counter)?;
        let w = gramian(&y, &mut counter, flags.gramian_mode());
        match cholesky(&w, &mut counter) {
            Ok(lw) => chol_logdet(&la).mul(chol_logdet(&lw)),
            // W = X^T A^-1 X is positive semidefinite here, so a failed
            // pivot means it is singular to tolerance
            Err(Error::NotSpd { .. }) => SignedLogDet::zero(),
            Err(e) => return Err(e),
        }
    } else {
        let lua = lu_partial_pivot(a, &mut counter)?;
        let da = logdet_triangular_lu(&lua);
        if da.is_zero() {
            SignedLogDet::zero()
        } else {
            let px = x.permuted_rows(lua.perm());
            let z = solve_triangular(lua.l(), &px, TriangleSide::Lower, &mut counter)?;
            let y = solve_triangular(lua.u(), &z, TriangleSide::Upper, &mut counter)?;
            let w = gemm(&x.transpose(), &y, &mut counter)?;
            let luw = lu_partial_pivot(&w, &mut counter)?;
            da.mul(logdet_triangular_lu(&luw))
        }
    };

    Ok(LdResult {
        value,
        counter,
        wall_ns: start.elapsed().as_nanos() as u64,
        algorithm: LdAlgorithm::Ld1,
    })
}

/// `logdet(A, X)` through the nonsingular completion
/// `N = I - P + A P`, assembled with low-rank products.
pub fn ld2(a: &DenseMatrix, x: &DenseMatrix, flags: LdFlags) -> Result<LdResult> {
    check_inputs(a, x)?;
    let mut counter = OpCounter::new();
    let start = Instant::now();
    let n = a.rows();

    let c = a.sub(&DenseMatrix::identity(n));
    let (e, v_part) = if flags.orth {
        let d = gemm(&c, x, &mut counter)?;
        let e = gemm(&d, &x.transpose(), &mut counter)?;
        (e, SignedLogDet::one())
    } else {
        let v = gramian(x, &mut counter, flags.gramian_mode());
        let lv = match cholesky(&v, &mut counter) {
            Ok(lv) => lv,
            Err(Error::NotSpd { step, .. }) => return Err(Error::RankDeficient { col: step }),
            Err(e) => return Err(e),
        };
        // Y = X L_V^{-T}, via L_V Y^T = X^T
        let yt = solve_triangular(lv.l(), &x.transpose(), TriangleSide::Lower, &mut counter)?;
        let d = gemm(&c, &yt.transpose(), &mut counter)?;
        let e = gemm(&d, &yt, &mut counter)?;
        (e, chol_logdet(&lv))
    };
    let nmat = a.sub(&e);
    let lun = lu_partial_pivot(&nmat, &mut counter)?;
    let value = v_part.mul(logdet_triangular_lu(&lun));

    Ok(LdResult {
        value,
        counter,
        wall_ns: start.elapsed().as_nanos() as u64,
        algorithm: LdAlgorithm::Ld2,
    })
}

/// `logdet(A, X)` by compression of `A` onto the orthogonal complement of
/// `im(X)`.
///
/// The complement basis is taken from `uperp` when supplied (the
/// precomputed-basis scenario: no construction cost is charged) and built
/// from `seed` otherwise. A supplied basis is trusted; use
/// [`verify_complement`] for an opt-in check.
pub fn ld3(
    a: &DenseMatrix,
    x: &DenseMatrix,
    flags: LdFlags,
    uperp: Option<&DenseMatrix>,
    seed: u64,
) -> Result<LdResult> {
    check_inputs(a, x)?;
    let n = a.rows();
    let p = x.cols();
    if let Some(u) = uperp {
        if u.rows() != n || u.cols() != n - p {
            return Err(Error::ShapeMismatch(format!(
                "supplied complement must be {}x{}, got {}x{}",
                n,
                n - p,
                u.rows(),
                u.cols()
            )));
        }
    }
    let mut counter = OpCounter::new();
    let start = Instant::now();

    let xprime = if flags.orth {
        x.clone()
    } else {
        gram_schmidt(x, &mut counter)?
    };
    let u = match uperp {
        Some(u) => u.clone(),
        None => complement_basis(&xprime, seed, &mut counter)?,
    };
    let y = gemm(a, &u, &mut counter)?;
    // the compressed matrix is symmetric only when A is; the half product
    // is available only in that case
    let zmode = if flags.spd && flags.gamma_half {
        GramianMode::Half
    } else {
        GramianMode::Full
    };
    let z = gramian_pair(&u, &y, &mut counter, zmode)?;

    let alpha = if flags.spd {
        let lz = cholesky(&z, &mut counter)?;
        chol_logdet(&lz)
    } else {
        let luz = lu_partial_pivot(&z, &mut counter)?;
        logdet_triangular_lu(&luz)
    };

    let value = if flags.orth {
        alpha
    } else {
        let v = gramian(x, &mut counter, flags.gramian_mode());
        match cholesky(&v, &mut counter) {
            Ok(lv) => alpha.mul(chol_logdet(&lv)),
            Err(Error::NotSpd { step, .. }) => return Err(Error::RankDeficient { col: step }),
            Err(e) => return Err(e),
        }
    };

    Ok(LdResult {
        value,
        counter,
        wall_ns: start.elapsed().as_nanos() as u64,
        algorithm: LdAlgorithm::Ld3,
    })
}

/// `2 * sum_i log L_ii` as a signed value, i.e. `logdet(L L^T)`.
fn chol_logdet(f: &CholFactor) -> SignedLogDet {
    let half = logdet_triangular_chol(f);
    if half.is_zero() {
        SignedLogDet::zero()
    } else {
        SignedLogDet::new(1, 2.0 * half.logabs)
    }
}

/// Dispatch by algorithm tag.
pub fn logdet_axx(
    a: &DenseMatrix,
    x: &DenseMatrix,
    flags: LdFlags,
    algorithm: LdAlgorithm,
    uperp: Option<&DenseMatrix>,
    seed: u64,
) -> Result<LdResult> {
    match algorithm {
        LdAlgorithm::Ld1 => ld1(a, x, flags),
        LdAlgorithm::Ld2 => ld2(a, x, flags),
        LdAlgorithm::Ld3 => ld3(a, x, flags, uperp, seed),
    }
}

/// Opt-in check that `uperp` is an orthonormal complement of the
/// orthonormal `x_orth`.
pub fn verify_complement(x_orth: &DenseMatrix, uperp: &DenseMatrix) -> bool {
    if x_orth.rows() != uperp.rows() || x_orth.cols() + uperp.cols() != x_orth.rows() {
        return false;
    }
    let full = x_orth.hcat(uperp);
    let g = full.transpose().matmul(&full);
    g.sub(&DenseMatrix::identity(full.cols())).max_abs() < ORTH_TOL
}

/// Analytic complexity of each algorithm per `n^3` MACs as a function of
/// the aspect ratio `rho = p/n`.
///
/// The per-task charges: Cholesky `k^3/3`, LU `2k^3/3`, triangular solve
/// `k^2 m / 2`, Gramian `gamma k m^2`, general product `k m l`,
/// Gram-Schmidt `2 k m^2`, complement construction `2 delta k (k^2 - m^2)`.
/// `gamma` is 1/2 when the half product is selected, 1 otherwise; `delta`
/// is 0 when the complement basis is precomputed, 1 otherwise.
pub fn complexity_model(algorithm: LdAlgorithm, rho: f64, flags: LdFlags) -> f64 {
    assert!((0.0..=1.0).contains(&rho), "rho must lie in [0, 1]");
    let g = if flags.gamma_half { 0.5 } else { 1.0 };
    let d = if flags.delta_precomputed { 0.0 } else { 1.0 };
    let q = 1.0 - rho;
    match algorithm {
        LdAlgorithm::Ld1 => {
            if flags.spd {
                1.0 / 3.0 + 0.5 * rho + g * rho * rho + rho.powi(3) / 3.0
            } else {
                2.0 / 3.0 + rho + rho * rho + 2.0 * rho.powi(3) / 3.0
            }
        }
        LdAlgorithm::Ld2 => {
            let tail = if flags.orth {
                0.0
            } else {
                (g + 0.5) * rho * rho + rho.powi(3) / 3.0
            };
            2.0 / 3.0 + 2.0 * rho + tail
        }
        LdAlgorithm::Ld3 => {
            let core = if flags.spd {
                q + g * q * q + q.powi(3) / 3.0
            } else {
                q + q * q + 2.0 * q.powi(3) / 3.0
            };
            let tail = if flags.orth {
                2.0 * d * (1.0 - rho * rho)
            } else {
                2.0 * rho * rho + 2.0 * d * (1.0 - rho * rho) + g * rho * rho + rho.powi(3) / 3.0
            };
            core + tail
        }
    }
}

/// Smallest `rho` in `(0, 1)` past which `other` becomes cheaper than
/// `base` under the analytic model, or `None` when no crossover exists.
pub fn model_crossover(
    base: (LdAlgorithm, LdFlags),
    other: (LdAlgorithm, LdFlags),
) -> Option<f64> {
    let h = |rho: f64| complexity_model(other.0, rho, other.1) - complexity_model(base.0, rho, base.1);
    let steps = 4096;
    let mut prev = h(0.0);
    for k in 1..=steps {
        let rho = k as f64 / steps as f64;
        let cur = h(rho);
        if prev >= 0.0 && cur < 0.0 {
            // bisect the bracket
            let (mut lo, mut hi) = ((k - 1) as f64 / steps as f64, rho);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if h(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = cur;
    }
    None
}

/// One measured point of a crossover scan.
#[derive(Clone, Debug)]
pub struct CrossoverRow {
    pub rho: f64,
    pub p: usize,
    /// Model-equivalent MAC totals for LD1, LD2, LD3.
    pub macs: [u64; 3],
    pub wall_ns: [u64; 3],
}

/// Result of sweeping all three algorithms over a `rho` grid on one seeded
/// instance family.
#[derive(Clone, Debug)]
pub struct CrossoverScan {
    pub rows: Vec<CrossoverRow>,
    /// Interpolated smallest `rho` where LD2's counter total drops below
    /// LD1's, if any.
    pub ld2_crossover: Option<f64>,
    /// Same for LD3 vs LD1.
    pub ld3_crossover: Option<f64>,
}

/// Run all three algorithms over a `rho` grid on a seeded SPD instance,
/// reusing one matrix and the leading columns of one orthonormalized `X`
/// across the grid.
pub fn crossover_scan(
    n: usize,
    flags: LdFlags,
    rho_grid: &[f64],
    seed: u64,
) -> Result<CrossoverScan> {
    let a = random_spd(n, 0.5, 2.0, seed)?;
    let mut scratch = OpCounter::new();
    let xfull = gram_schmidt(
        &crate::dense::gaussian_matrix(n, n.saturating_sub(1), seed ^ 0x58),
        &mut scratch,
    )?;

    let mut rows = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let p = ((rho * n as f64).round() as usize).clamp(1, n - 1);
        let x = xfull.leading_columns(p);
        let uperp = if flags.delta_precomputed {
            Some(complement_basis(&x, seed ^ 0x55, &mut scratch)?)
        } else {
            None
        };
        let mut macs = [0u64; 3];
        let mut wall = [0u64; 3];
        for (k, alg) in ALL_ALGORITHMS.iter().enumerate() {
            let r = logdet_axx(&a, &x, flags, *alg, uperp.as_ref(), seed ^ (k as u64))?;
            macs[k] = r.counter.model_total();
            wall[k] = r.wall_ns;
        }
        rows.push(CrossoverRow {
            rho,
            p,
            macs,
            wall_ns: wall,
        });
    }

    let ld2_crossover = measured_crossover(&rows, 1);
    let ld3_crossover = measured_crossover(&rows, 2);
    Ok(CrossoverScan {
        rows,
        ld2_crossover,
        ld3_crossover,
    })
}

/// Linear interpolation of the first grid bracket where algorithm `idx`
/// drops below LD1.
fn measured_crossover(rows: &[CrossoverRow], idx: usize) -> Option<f64> {
    let diff = |r: &CrossoverRow| r.macs[idx] as f64 - r.macs[0] as f64;
    for w in rows.windows(2) {
        let (d0, d1) = (diff(&w[0]), diff(&w[1]));
        if d0 >= 0.0 && d1 < 0.0 {
            let t = d0 / (d0 - d1);
            return Some(w[0].rho + t * (w[1].rho - w[0].rho));
        }
    }
    if rows.first().map(|r| diff(r) < 0.0).unwrap_or(false) {
        return rows.first().map(|r| r.rho);
    }
    None
}
