//! Exact low-rank least squares for the unregularized squared loss with
//! every label observed, by two independent routes.
//!
//! The direct route truncates the SVD of `U_X^T Y` and maps it back through
//! `V_X Sigma_X^{-1}`. The label-space route (the CPLST form) takes the top
//! `k` eigenvectors `H_C` of `Y^T X X^+ Y` and returns `X^+ Y H_C H_C^T`.
//! Both are dense and meant for small problems: as baselines and as oracles
//! for the iterative trainer.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, SparseRowMatrix};

/// Relative cutoff below which singular values are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Largest `n * d` the dense closed forms accept.
pub const MAX_DENSE_CELLS: usize = 10_000_000;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(S) V^T` keeping only singular values above the cutoff.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    /// Descending.
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let us = DenseMatrix::from_fn(self.u.rows(), self.rank(), |i, j| {
            self.u.get(i, j) * self.s[j]
        });
        us.matmul_transposed(&self.v).expect("factor shapes agree")
    }
}

/// Thin SVD by one-sided Jacobi rotations.
///
/// Keeps triplets with `sigma > rank_tol * sigma_max`; the zero matrix gives
/// rank 0.
pub fn thin_svd(a: &DenseMatrix, rank_tol: f64) -> Result<ThinSvd> {
    if !a.is_finite() {
        return Err(Error::NonFinite("thin_svd input".into()));
    }
    if a.rows() < a.cols() {
        let t = thin_svd(&a.transpose(), rank_tol)?;
        return Ok(ThinSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = a.shape();
    // Columns of `work` converge to U * Sigma; `v` accumulates the rotations.
    let mut work = a.transpose();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(work.row(p), work.row(p));
                let beta = dot(work.row(q), work.row(q));
                let gamma = dot(work.row(p), work.row(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut work, p, q, c, s);
                rotate_rows(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut triplets: Vec<(f64, usize)> = (0..n).map(|j| (dot(work.row(j), work.row(j)).sqrt(), j)).collect();
    triplets.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let sigma_max = triplets.first().map_or(0.0, |t| t.0);
    let keep: Vec<(f64, usize)> = triplets
        .into_iter()
        .filter(|&(sigma, _)| sigma > 0.0 && sigma > rank_tol * sigma_max)
        .collect();
    let r = keep.len();
    let u = DenseMatrix::from_fn(m, r, |i, c| work.get(keep[c].1, i) / keep[c].0);
    let vv = DenseMatrix::from_fn(n, r, |i, c| v.get(keep[c].1, i));
    Ok(ThinSvd {
        u,
        s: keep.iter().map(|t| t.0).collect(),
        v: vv,
    })
}

/// Applies a Givens rotation to rows `p`, `q` (the stored transposes).
fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// A closed-form predictor matrix `Z` (`d x L`).
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub z: DenseMatrix,
    /// The `k`-th and `(k+1)`-th singular values coincide, so the rank-`k`
    /// minimizer is not unique and the first `k` computed directions were kept.
    pub tie_at_rank: bool,
}

fn check_inputs(x: &SparseRowMatrix, y: &SparseRowMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if x.rows() != y.rows() {
        return Err(Error::dims("closed form", format!("Y with {} rows", x.rows()), y.rows()));
    }
    if x.rows().saturating_mul(x.cols()) > MAX_DENSE_CELLS {
        return Err(Error::InvalidArgument(format!(
            "{}x{} feature matrix exceeds the dense closed-form limit of {MAX_DENSE_CELLS} cells",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn has_tie(s: &[f64], k: usize) -> bool {
    k < s.len() && (s[k - 1] - s[k]).abs() <= 1e-10 * s[0]
}

/// `argmin_{rank(Z) <= k} |Y - XZ|_F^2 = V_X Sigma_X^{-1} M_k`, where `M_k`
/// is the rank-`k` truncation of `M = U_X^T Y`. Rank-deficient `X` is
/// handled through its thin SVD (pseudo-inverse semantics).
pub fn closed_form_squared_full(
    x: &SparseRowMatrix,
    y: &SparseRowMatrix,
    k: usize,
) -> Result<ClosedFormSolution> {
    check_inputs(x, y, k)?;
    let svd_x = thin_svd(&x.to_dense(), DEFAULT_RANK_TOL)?;
    let labels = y.cols();
    let d = x.cols();
    if svd_x.rank() == 0 {
        return Ok(ClosedFormSolution {
            z: DenseMatrix::zeros(d, labels),
            tie_at_rank: false,
        });
    }
    let m = svd_x.u.transpose().matmul(&y.to_dense())?;
    let svd_m = thin_svd(&m, DEFAULT_RANK_TOL)?;
    let kk = k.min(svd_m.rank());
    // M_k = U_k S_k V_k^T
    let left = DenseMatrix::from_fn(svd_x.rank(), kk, |i, c| svd_m.u.get(i, c) * svd_m.s[c]);
    let mk = left.matmul_transposed(&svd_m.v.leading_cols(kk))?;
    let v_scaled = DenseMatrix::from_fn(d, svd_x.rank(), |i, c| svd_x.v.get(i, c) / svd_x.s[c]);
    Ok(ClosedFormSolution {
        z: v_scaled.matmul(&mk)?,
        tie_at_rank: has_tie(&svd_m.s, k),
    })
}

/// The label-space route: `H_C = V_k[Y^T X X^+ Y]`, `W_C = X^+ Y H_C`,
/// `Z = W_C H_C^T`.
pub fn cplst_solution(
    x: &SparseRowMatrix,
    y: &SparseRowMatrix,
    k: usize,
) -> Result<ClosedFormSolution> {
    check_inputs(x, y, k)?;
    let xd = x.to_dense();
    let yd = y.to_dense();
    let pinv = pseudo_inverse(&xd)?;
    let t = pinv.matmul(&yd)?; // X^+ Y, d x L
    let xt = xd.matmul(&t)?; // X X^+ Y, n x L
    let gram = yd.transpose().matmul(&xt)?; // Y^T X X^+ Y, L x L
    let eig = thin_svd(&gram, DEFAULT_RANK_TOL)?;
    let kk = k.min(eig.rank());
    let h_c = eig.v.leading_cols(kk);
    let w_c = t.matmul(&h_c)?;
    Ok(ClosedFormSolution {
        z: w_c.matmul_transposed(&h_c)?,
        tie_at_rank: has_tie(&eig.s, k),
    })
}

/// Moore-Penrose pseudo-inverse via the thin SVD.
pub fn pseudo_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let svd = thin_svd(a, DEFAULT_RANK_TOL)?;
    let v_scaled = DenseMatrix::from_fn(a.cols(), svd.rank(), |i, c| svd.v.get(i, c) / svd.s[c]);
    v_scaled.matmul_transposed(&svd.u)
}

/// `|Y - XZ|_F^2`.
pub fn squared_residual(
    x: &SparseRowMatrix,
    y: &SparseRowMatrix,
    z: &DenseMatrix,
) -> Result<f64> {
    let xz = crate::kernels::dense_spmm(x, z)?;
    if xz.shape() != (y.rows(), y.cols()) {
        return Err(Error::dims(
            "squared_residual",
            format!("{}x{}", y.rows(), y.cols()),
            format!("{}x{}", xz.rows(), xz.cols()),
        ));
    }
    Ok(y.to_dense().sub(&xz)?.frobenius_norm_sq())
}
