//! Trust-region Newton method with a Steihaug-truncated CG inner solver.

use super::{FnProblem, SolverReport, TwiceDifferentiable};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TronOptions {
    /// Stop once `|grad| <= tol * max(1, |grad(w0)|)`.
    pub tol: f64,
    /// Outer (trust-region) iterations, accepted or rejected.
    pub max_iter: usize,
    /// Inner CG stops at `|r| <= cg_tol * |grad|`.
    pub cg_tol: f64,
    /// Inner CG iteration cap; `None` uses the problem dimension.
    pub max_cg_iter: Option<usize>,
    /// Minimum actual/predicted reduction ratio for accepting a step.
    pub accept_ratio: f64,
}

impl Default for TronOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 25,
            cg_tol: 0.1,
            max_cg_iter: None,
            accept_ratio: 1e-4,
        }
    }
}

const SHRINK_BELOW: f64 = 0.25;
const EXPAND_ABOVE: f64 = 0.75;
const SHRINK_FACTOR: f64 = 0.25;
const EXPAND_FACTOR: f64 = 2.0;

/// Minimizes a convex function given value, gradient and Hessian-vector callbacks.
pub fn tron_minimize<V, G, H>(
    value: V,
    grad: G,
    hv: H,
    w0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolverReport)>
where
    V: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], &mut [f64]),
    H: FnMut(&[f64], &[f64], &mut [f64]),
{
    let mut problem = FnProblem::new(w0.len(), value, grad, hv);
    tron_minimize_with(
        &mut problem,
        w0,
        &TronOptions {
            tol,
            max_iter,
            ..TronOptions::default()
        },
    )
}

/// [`tron_minimize`] over a [`TwiceDifferentiable`] problem.
///
/// Accepted steps strictly decrease the objective, so the returned point is
/// never worse than `w0`. Non-finite callback output aborts with
/// [`Error::NonFinite`].
pub fn tron_minimize_with<P: TwiceDifferentiable + ?Sized>(
    problem: &mut P,
    w0: &[f64],
    opts: &TronOptions,
) -> Result<(Vec<f64>, SolverReport)> {
    let n = problem.dim();
    if w0.len() != n {
        return Err(Error::dims("tron_minimize", n, w0.len()));
    }
    let mut w = w0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = problem.value(&w);
    problem.gradient(&w, &mut g);
    let mut report = SolverReport {
        objective_evals: 1,
        ..SolverReport::default()
    };
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("objective at the starting point".into()));
    }
    let mut gnorm = norm(&g);
    if !gnorm.is_finite() {
        return Err(Error::NonFinite("gradient norm at the starting point".into()));
    }
    let threshold = opts.tol * gnorm.max(1.0);
    report.tolerance = threshold;
    let mut delta = gnorm;
    let max_cg = opts.max_cg_iter.unwrap_or(n).max(1);

    let mut step = vec![0.0; n];
    let mut resid = vec![0.0; n];
    let mut w_new = vec![0.0; n];
    let mut scratch = CgScratch::new(n);

    loop {
        if gnorm <= threshold {
            report.converged = true;
            break;
        }
        if report.iterations >= opts.max_iter {
            break;
        }
        report.iterations += 1;

        let (hv_evals, hit_boundary) = steihaug_cg(
            problem,
            &w,
            &g,
            delta,
            opts.cg_tol * gnorm,
            max_cg,
            &mut step,
            &mut resid,
            &mut scratch,
        )?;
        report.hv_evals += hv_evals;

        // q(s) = g^T s + s^T H s / 2 = (g^T s - s^T r) / 2 since H s = -g - r
        let gs = dot(&g, &step);
        let predicted = -0.5 * (gs - dot(&step, &resid));
        w_new.copy_from_slice(&w);
        axpy(1.0, &step, &mut w_new);
        let f_new = problem.value(&w_new);
        report.objective_evals += 1;
        if !f_new.is_finite() {
            return Err(Error::NonFinite("objective at a trial point".into()));
        }
        let actual = f - f_new;
        let snorm = norm(&step);
        let ratio = if predicted > 0.0 { actual / predicted } else { f64::NEG_INFINITY };

        if ratio < SHRINK_BELOW {
            delta = SHRINK_FACTOR * delta.min(snorm);
        } else if ratio > EXPAND_ABOVE && hit_boundary {
            delta *= EXPAND_FACTOR;
        }

        if ratio > opts.accept_ratio && actual > 0.0 {
            std::mem::swap(&mut w, &mut w_new);
            f = f_new;
            problem.gradient(&w, &mut g);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("gradient at an accepted point".into()));
            }
            gnorm = norm(&g);
            if !gnorm.is_finite() {
                return Err(Error::NonFinite("gradient norm at an accepted point".into()));
            }
        } else if delta <= f64::EPSILON * norm(&w).max(1.0)
            || (actual.abs() <= 1e-15 * f.abs() && predicted.abs() <= 1e-15 * f.abs())
        {
            log::debug!("trust region stalled at |g| = {gnorm:e}");
            break;
        }
    }
    report.final_residual_norm = gnorm;
    Ok((w, report))
}

struct CgScratch {
    d: Vec<f64>,
    hd: Vec<f64>,
}

impl CgScratch {
    fn new(n: usize) -> Self {
        Self {
            d: vec![0.0; n],
            hd: vec![0.0; n],
        }
    }
}

/// Approximately solves `H s = -g` subject to `|s| <= delta`.
///
/// Leaves the step in `s` and the residual `-g - H s` in `r`; returns the
/// number of Hessian-vector products and whether the boundary was reached.
#[allow(clippy::too_many_arguments)]
fn steihaug_cg<P: TwiceDifferentiable + ?Sized>(
    problem: &mut P,
    w: &[f64],
    g: &[f64],
    delta: f64,
    cg_tol: f64,
    max_iter: usize,
    s: &mut [f64],
    r: &mut [f64],
    scratch: &mut CgScratch,
) -> Result<(usize, bool)> {
    s.fill(0.0);
    for (ri, gi) in r.iter_mut().zip(g) {
        *ri = -gi;
    }
    let CgScratch { d, hd } = scratch;
    d.copy_from_slice(r);
    let mut rr = dot(r, r);
    let mut evals = 0;
    for _ in 0..max_iter {
        if rr.sqrt() <= cg_tol {
            break;
        }
        problem.hess_vec(w, d, hd);
        evals += 1;
        let dhd = dot(d, hd);
        if !dhd.is_finite() {
            return Err(Error::NonFinite("Hessian-vector product".into()));
        }
        let alpha = rr / dhd;
        let crosses = dhd <= 0.0 || {
            let ss = dot(s, s) + 2.0 * alpha * dot(s, d) + alpha * alpha * dot(d, d);
            ss > delta * delta
        };
        if crosses {
            let tau = boundary_step(s, d, delta);
            axpy(tau, d, s);
            axpy(-tau, hd, r);
            return Ok((evals, true));
        }
        axpy(alpha, d, s);
        axpy(-alpha, hd, r);
        let rr_next = dot(r, r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (di, ri) in d.iter_mut().zip(r.iter()) {
            *di = ri + beta * *di;
        }
    }
    Ok((evals, false))
}

/// Positive `tau` with `|s + tau d| = delta`, assuming `|s| <= delta`.
fn boundary_step(s: &[f64], d: &[f64], delta: f64) -> f64 {
    let sd = dot(s, d);
    let ss = dot(s, s);
    let dd = dot(d, d);
    let gap = (delta * delta - ss).max(0.0);
    let rad = (sd * sd + dd * gap).sqrt();
    if sd >= 0.0 {
        gap / (sd + rad)
    } else {
        (rad - sd) / dd
    }
}
