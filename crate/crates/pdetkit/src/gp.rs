//! Gaussian-process likelihood layer: the singular-form likelihood on the
//! complement of the design-matrix span, the proper-prior likelihood with
//! its Woodbury-equivalent route, the Bott-Duffin precision matrix, and
//! the Neumann-series precision approximation for mixed covariances.

use crate::counter::OpCounter;
use crate::dense::{
    cholesky, complement_basis, gram_schmidt, invert_lu, solve_triangular, TriangleSide,
};
use crate::error::{Error, Result};
use crate::geninv::bott_duffin;
use crate::logdet::{logdet_axx, LdAlgorithm, LdFlags};
use crate::matrix::DenseMatrix;
use crate::oracle::jacobi_eigen;
use crate::tol::SYM_TOL;

/// Covariance `sigma2 * K + varsigma2 * I` split into its parts.
#[derive(Clone, Debug)]
pub struct MixedCov {
    pub k: DenseMatrix,
    pub sigma2: f64,
    pub varsigma2: f64,
}

/// Data vector, design matrix and SPD covariance for likelihood
/// evaluation.
#[derive(Clone, Debug)]
pub struct GPModel {
    y: Vec<f64>,
    x: DenseMatrix,
    sigma: DenseMatrix,
    mixed: Option<MixedCov>,
}

impl GPModel {
    pub fn new(y: Vec<f64>, x: DenseMatrix, sigma: DenseMatrix) -> Result<Self> {
        if x.rows() != y.len() || sigma.rows() != y.len() || !sigma.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "y has {} entries, X is {}x{}, Sigma is {}x{}",
                y.len(),
                x.rows(),
                x.cols(),
                sigma.rows(),
                sigma.cols()
            )));
        }
        let asym = sigma.asymmetry();
        if asym > SYM_TOL {
            return Err(Error::NotSymmetric { asym });
        }
        Ok(GPModel {
            y,
            x,
            sigma,
            mixed: None,
        })
    }

    /// Mixed covariance model `Sigma = sigma2 K + varsigma2 I`.
    pub fn mixed(
        y: Vec<f64>,
        x: DenseMatrix,
        k: DenseMatrix,
        sigma2: f64,
        varsigma2: f64,
    ) -> Result<Self> {
        if sigma2 < 0.0 || varsigma2 <= 0.0 {
            return Err(Error::BadParams(
                "mixed model needs sigma2 >= 0 and varsigma2 > 0".into(),
            ));
        }
        let n = k.rows();
        let sigma = DenseMatrix::from_fn(n, n, |i, j| {
            sigma2 * k.at(i, j) + if i == j { varsigma2 } else { 0.0 }
        });
        let mut model = Self::new(y, x, sigma)?;
        model.mixed = Some(MixedCov {
            k,
            sigma2,
            varsigma2,
        });
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn xdesign(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn sigma(&self) -> &DenseMatrix {
        &self.sigma
    }

    pub fn mixed_cov(&self) -> Option<&MixedCov> {
        self.mixed.as_ref()
    }
}

/// Normal prior on the regression coefficients.
#[derive(Clone, Debug)]
pub struct PriorSpec {
    pub b: Vec<f64>,
    pub big_b: DenseMatrix,
}

/// Log-likelihood of the singular form, plus the norm of the data
/// component that was dropped by projecting onto the complement of
/// `im(X)`.
#[derive(Clone, Copy, Debug)]
pub struct SingularLoglike {
    pub logp: f64,
    pub dropped_norm: f64,
}

const LN_2PI: f64 = 1.8378770664093453;

/// Log-likelihood of the improper-prior (singular) form.
///
/// The value is only meaningful for data in the complement of `im(X)`;
/// the data vector is projected there first and the discarded norm is
/// reported. The log-determinant pair is computed by the selected
/// algorithm; the quadratic form by triangular solves.
pub fn loglike_singular(model: &GPModel, algorithm: LdAlgorithm) -> Result<SingularLoglike> {
    let n = model.n();
    let p = model.p();
    let mut scratch = OpCounter::new();

    // project y onto the complement of im(X)
    let (y_perp, dropped_norm) = project_out(&model.y, &model.x, &mut scratch)?;

    let flags = LdFlags {
        spd: true,
        orth: false,
        gamma_half: true,
        delta_precomputed: false,
    };
    let ld = logdet_axx(&model.sigma, &model.x, flags, algorithm, None, 0x6770)?;
    if ld.value.sign <= 0 {
        return Err(Error::SingularW);
    }

    let quad = singular_quadratic(&model.sigma, &model.x, &y_perp, &mut scratch)?;

    let logp = -0.5 * (n - p) as f64 * LN_2PI - 0.5 * ld.value.logabs - 0.5 * quad;
    Ok(SingularLoglike { logp, dropped_norm })
}

/// `||y||^2_M` for `y` already in the complement of `im(X)`:
/// `y^T S^-1 y - v^T (X^T S^-1 X)^-1 v` with `v = X^T S^-1 y`, through two
/// Cholesky factorizations and triangular solves.
fn singular_quadratic(
    sigma: &DenseMatrix,
    x: &DenseMatrix,
    y: &[f64],
    scratch: &mut OpCounter,
) -> Result<f64> {
    let l = cholesky(sigma, scratch)?;
    let ym = DenseMatrix::column_vector(y);
    let u = solve_triangular(l.l(), &ym, TriangleSide::Lower, scratch)?;
    let uu: f64 = u.data().iter().map(|v| v * v).sum();
    if x.cols() == 0 {
        return Ok(uu);
    }
    let w = solve_triangular(l.l(), x, TriangleSide::Lower, scratch)?;
    let g = w.transpose().matmul(&w);
    let lw = match cholesky(&g, scratch) {
        Ok(f) => f,
        Err(Error::NotSpd { step, .. }) => return Err(Error::RankDeficient { col: step }),
        Err(e) => return Err(e),
    };
    let v = w.transpose().matmul(&u);
    let t = solve_triangular(lw.l(), &v, TriangleSide::Lower, scratch)?;
    let tt: f64 = t.data().iter().map(|v| v * v).sum();
    Ok(uu - tt)
}

fn project_out(
    y: &[f64],
    x: &DenseMatrix,
    scratch: &mut OpCounter,
) -> Result<(Vec<f64>, f64)> {
    if x.cols() == 0 {
        return Ok((y.to_vec(), 0.0));
    }
    let q = gram_schmidt(x, scratch)?;
    let coeffs = q.transpose_mul_vec(y);
    let inside = q.mul_vec(&coeffs);
    let y_perp: Vec<f64> = y.iter().zip(&inside).map(|(a, b)| a - b).collect();
    let dropped = inside.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((y_perp, dropped))
}

/// Log-likelihood under a proper normal prior on the coefficients,
/// evaluated through two independent routes that must agree: the direct
/// factorized form and the Woodbury form with the equivalent covariance
/// `Sigma + X B X^T`. Returns the Woodbury-route value.
pub fn loglike_prior(model: &GPModel, prior: &PriorSpec) -> Result<f64> {
    let n = model.n();
    let p = model.p();
    if prior.b.len() != p || prior.big_b.rows() != p || !prior.big_b.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "prior must be sized {p}, got b of {} and B {}x{}",
            prior.b.len(),
            prior.big_b.rows(),
            prior.big_b.cols()
        )));
    }
    let mut scratch = OpCounter::new();

    let xb = model.x.mul_vec(&prior.b);
    let r: Vec<f64> = model.y.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let rm = DenseMatrix::column_vector(&r);

    // direct route
    let direct = {
        let l = cholesky(&model.sigma, &mut scratch)?;
        let logdet_sigma = 2.0 * l
            .l()
            .data()
            .iter()
            .step_by(n + 1)
            .map(|v| v.ln())
            .sum::<f64>();
        let u = solve_triangular(l.l(), &rm, TriangleSide::Lower, &mut scratch)?;
        let uu: f64 = u.data().iter().map(|v| v * v).sum();
        let (logdet_b, binv) = if p > 0 {
            let lb = cholesky(&prior.big_b, &mut scratch)?;
            let logdet_b = 2.0 * (0..p).map(|i| lb.l().at(i, i).ln()).sum::<f64>();
            (logdet_b, invert_lu(&prior.big_b, &mut scratch)?)
        } else {
            (0.0, DenseMatrix::zeros(0, 0))
        };
        let (quad, logdet_g) = if p > 0 {
            let w = solve_triangular(l.l(), &model.x, TriangleSide::Lower, &mut scratch)?;
            let g = w.transpose().matmul(&w).add(&binv);
            let lg = cholesky(&g, &mut scratch)?;
            let logdet_g = 2.0 * (0..p).map(|i| lg.l().at(i, i).ln()).sum::<f64>();
            let v = w.transpose().matmul(&u);
            let t = solve_triangular(lg.l(), &v, TriangleSide::Lower, &mut scratch)?;
            let tt: f64 = t.data().iter().map(|v| v * v).sum();
            (uu - tt, logdet_g)
        } else {
            (uu, 0.0)
        };
        -0.5 * n as f64 * LN_2PI - 0.5 * (logdet_sigma + logdet_b + logdet_g) - 0.5 * quad
    };

    // Woodbury route with the equivalent covariance
    let woodbury = {
        let xbxt = if p > 0 {
            model.x.matmul(&prior.big_b).matmul(&model.x.transpose())
        } else {
            DenseMatrix::zeros(n, n)
        };
        let sigma_eq = model.sigma.add(&xbxt).symmetrized();
        let l = cholesky(&sigma_eq, &mut scratch)?;
        let logdet_eq = 2.0 * (0..n).map(|i| l.l().at(i, i).ln()).sum::<f64>();
        let u = solve_triangular(l.l(), &rm, TriangleSide::Lower, &mut scratch)?;
        let uu: f64 = u.data().iter().map(|v| v * v).sum();
        -0.5 * n as f64 * LN_2PI - 0.5 * logdet_eq - 0.5 * uu
    };

    if (direct - woodbury).abs() > 1e-8 * woodbury.abs().max(1.0) {
        return Err(Error::RoutesDisagree { direct, woodbury });
    }
    Ok(woodbury)
}

/// Quadratic form `||y - X b||^2_M` of the proper-prior likelihood,
/// computed by the stable factorized route (useful for limit studies with
/// nearly improper priors, where the prior precision `B^-1` is passed
/// directly).
pub fn prior_quadratic_with_precision(
    model: &GPModel,
    b: &[f64],
    b_precision: &DenseMatrix,
) -> Result<f64> {
    let p = model.p();
    if b.len() != p || b_precision.rows() != p || !b_precision.is_square() {
        return Err(Error::ShapeMismatch("prior precision must be p x p".into()));
    }
    let mut scratch = OpCounter::new();
    let xb = model.x.mul_vec(b);
    let r: Vec<f64> = model.y.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let rm = DenseMatrix::column_vector(&r);
    let l = cholesky(&model.sigma, &mut scratch)?;
    let u = solve_triangular(l.l(), &rm, TriangleSide::Lower, &mut scratch)?;
    let uu: f64 = u.data().iter().map(|v| v * v).sum();
    if p == 0 {
        return Ok(uu);
    }
    let w = solve_triangular(l.l(), &model.x, TriangleSide::Lower, &mut scratch)?;
    let g = w.transpose().matmul(&w).add(b_precision);
    let lg = cholesky(&g, &mut scratch)?;
    let v = w.transpose().matmul(&u);
    let t = solve_triangular(lg.l(), &v, TriangleSide::Lower, &mut scratch)?;
    let tt: f64 = t.data().iter().map(|v| v * v).sum();
    Ok(uu - tt)
}

/// The precision matrix of the singular form as the Bott-Duffin inverse of
/// the covariance restricted to the complement of `im(X)`.
pub fn precision_bott_duffin(model: &GPModel) -> Result<DenseMatrix> {
    let mut scratch = OpCounter::new();
    let basis = if model.p() == 0 {
        complement_basis(&DenseMatrix::zeros(model.n(), 0), 0x626f7474, &mut scratch)?
    } else {
        let q = gram_schmidt(&model.x, &mut scratch)?;
        complement_basis(&q, 0x626f7474, &mut scratch)?
    };
    bott_duffin(&model.sigma, &basis)
}

/// Dense precision matrix of the singular form,
/// `S^-1 - S^-1 X (X^T S^-1 X)^-1 X^T S^-1`, via Cholesky solves.
pub fn precision_dense(sigma: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let mut scratch = OpCounter::new();
    let sinv = invert_lu(sigma, &mut scratch)?;
    if x.cols() == 0 {
        return Ok(sinv);
    }
    let sx = sinv.matmul(x);
    let w = x.transpose().matmul(&sx);
    let winv = invert_lu(&w, &mut scratch)?;
    Ok(sinv.sub(&sx.matmul(&winv).matmul(&sx.transpose())))
}

/// Truncated Neumann-series precision for the mixed covariance
/// `varsigma2 (I + t K)` restricted to the complement of `im(X)`:
/// partial sums of `varsigma2^-1 P sum_i (-t K P)^i`.
#[derive(Clone, Debug)]
pub struct NeumannResult {
    pub matrix: DenseMatrix,
    /// Geometric bound ratio `t * lambda_max(K)`; successive truncation
    /// errors shrink by about this factor.
    pub ratio: f64,
}

pub fn neumann_precision(
    k: &DenseMatrix,
    x: &DenseMatrix,
    t: f64,
    varsigma2: f64,
    order: usize,
    force: bool,
) -> Result<NeumannResult> {
    if t < 0.0 || varsigma2 <= 0.0 {
        return Err(Error::BadParams(
            "neumann series needs t >= 0 and varsigma2 > 0".into(),
        ));
    }
    let lam = lambda_max(k)?;
    let ratio = t * lam;
    // the power-iteration estimate gets a safety margin before the
    // convergence guard is trusted
    let guarded = if k.rows() <= 64 { ratio } else { ratio * 1.1 };
    if guarded >= 1.0 && !force {
        return Err(Error::Divergent { ratio });
    }

    let mut scratch = OpCounter::new();
    let n = k.rows();
    let pmat = if x.cols() == 0 {
        DenseMatrix::identity(n)
    } else {
        let q = gram_schmidt(x, &mut scratch)?;
        DenseMatrix::identity(n).sub(&q.matmul(&q.transpose()))
    };

    let mut term = pmat.clone();
    let mut sum = pmat.clone();
    for _ in 1..=order {
        term = term.matmul(k).matmul(&pmat).scaled(-t);
        sum = sum.add(&term);
    }
    Ok(NeumannResult {
        matrix: sum.scaled(1.0 / varsigma2),
        ratio,
    })
}

/// Largest eigenvalue of an SPD matrix: exact Jacobi at small sizes, power
/// iteration (relative tolerance 1e-10) above.
pub fn lambda_max(k: &DenseMatrix) -> Result<f64> {
    if !k.is_square() {
        return Err(Error::ShapeMismatch("lambda_max needs a square matrix".into()));
    }
    let n = k.rows();
    if n == 0 {
        return Ok(0.0);
    }
    if n <= 64 {
        let e = jacobi_eigen(k)?;
        return Ok(e.values()[0]);
    }
    let mut rng = crate::rng::Rng::from_seed_stream(0x6c616d62, 0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
    let mut lam = 0.0;
    for _ in 0..10_000 {
        let w = k.mul_vec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let new_lam: f64 = k
            .mul_vec(&next)
            .iter()
            .zip(&next)
            .map(|(a, b)| a * b)
            .sum();
        let done = (new_lam - lam).abs() <= 1e-10 * new_lam.abs().max(1e-300);
        lam = new_lam;
        v = next;
        if done {
            break;
        }
    }
    Ok(lam)
}
