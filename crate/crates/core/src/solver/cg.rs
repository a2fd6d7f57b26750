use super::SolverReport;
use crate::matrix::{axpy, dot};

/// Absolute floor under the relative CG stopping threshold.
const ABS_FLOOR: f64 = 1e-12;

/// Linear conjugate gradient for `H (w - w0) = -g0`, i.e. minimizing the
/// quadratic with gradient `g0` at `w0` and constant Hessian `H`.
///
/// Stops once `|r_t| <= max(tol * |r_0|, 1e-12)` or after `max_iter`
/// iterations. A non-finite starting residual, or a direction with
/// `d^T H d <= 0` or a non-finite product, ends the solve with `breakdown`
/// set; the iterate so far is returned.
pub fn cg_solve<F>(
    mut hv: F,
    g0: &[f64],
    w0: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, SolverReport)
where
    F: FnMut(&[f64], &mut [f64]),
{
    assert_eq!(g0.len(), w0.len(), "gradient and start point differ in length");
    let mut w = w0.to_vec();
    let mut r: Vec<f64> = g0.iter().map(|g| -g).collect();
    let mut d = r.clone();
    let mut q = vec![0.0; w.len()];
    let mut rr = dot(&r, &r);
    let threshold = (tol * rr.sqrt()).max(ABS_FLOOR);
    let mut report = SolverReport {
        tolerance: threshold,
        ..SolverReport::default()
    };

    if !rr.is_finite() {
        report.breakdown = true;
        report.final_residual_norm = f64::INFINITY;
        return (w, report);
    }
    loop {
        if rr.sqrt() <= threshold {
            report.converged = true;
            break;
        }
        if report.iterations >= max_iter {
            break;
        }
        hv(&d, &mut q);
        report.hv_evals += 1;
        let dq = dot(&d, &q);
        if !(dq > 0.0) || !dq.is_finite() {
            report.breakdown = true;
            break;
        }
        let alpha = rr / dq;
        axpy(alpha, &d, &mut w);
        axpy(-alpha, &q, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
        report.iterations += 1;
    }
    report.final_residual_norm = rr.sqrt();
    (w, report)
}
