//! Alternating minimization of the factorized objective and prediction.
//!
//! Training starts from `W = 0` and random `H`, so every round runs the
//! W-step first and the H-step second. Both steps warm-start from the
//! current factors.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::kernels::{dense_spmm, transpose_spmm};
use crate::loss::LossKind;
use crate::matrix::{axpy, dot, norm, DenseMatrix, SparseRowMatrix};
use crate::metrics::top_k_labels;
use crate::objective::{objective_for, Labels, WSubproblem};
use crate::observation::ObservationSet;
use crate::solver::{cg_solve, tron_minimize, tron_minimize_with, SolverReport, TronOptions};

/// A trained predictor `Z = W H^T`, kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
    pub kind: LossKind,
    pub lambda: f64,
}

impl FactorModel {
    pub fn new(w: DenseMatrix, h: DenseMatrix, kind: LossKind, lambda: f64) -> Result<Self> {
        if w.cols() != h.cols() {
            return Err(Error::dims("FactorModel", format!("H with rank {}", w.cols()), h.cols()));
        }
        if w.cols() == 0 {
            return Err(Error::InvalidArgument("model rank must be at least 1".into()));
        }
        Ok(Self { w, h, kind, lambda })
    }

    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    pub fn n_features(&self) -> usize {
        self.w.rows()
    }

    pub fn n_labels(&self) -> usize {
        self.h.rows()
    }
}

/// Which objective kernels the W-step uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TrainMode {
    /// Full-label kernels for squared loss on full labels, missing otherwise.
    #[default]
    Auto,
    Missing,
    Full,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Auto => "auto",
            TrainMode::Missing => "missing",
            TrainMode::Full => "full",
        })
    }
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(TrainMode::Auto),
            "missing" => Ok(TrainMode::Missing),
            "full" => Ok(TrainMode::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}', expected auto, missing or full"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub k: usize,
    pub lambda: f64,
    pub outer_iters: usize,
    pub loss: LossKind,
    /// Relative residual tolerance of the squared-loss W-step.
    pub cg_tol: f64,
    /// Relative gradient tolerance of TRON, both steps.
    pub tron_tol: f64,
    /// Iteration cap of every inner solve.
    pub inner_max_iter: usize,
    pub seed: u64,
    /// Half-width of the uniform `H` initialization; `None` means `1/sqrt(k)`.
    pub init_scale: Option<f64>,
    pub mode: TrainMode,
    /// More than one selects parallel kernels on a dedicated pool.
    pub threads: usize,
}

impl TrainConfig {
    pub fn new(k: usize, lambda: f64, loss: LossKind) -> Self {
        Self {
            k,
            lambda,
            outer_iters: 10,
            loss,
            cg_tol: 1e-4,
            tron_tol: 1e-3,
            inner_max_iter: 25,
            seed: 0,
            init_scale: None,
            mode: TrainMode::Auto,
            threads: 1,
        }
    }

    pub fn effective_init_scale(&self) -> f64 {
        self.init_scale.unwrap_or(1.0 / (self.k.max(1) as f64).sqrt())
    }

    pub fn exec(&self) -> Exec {
        Exec::for_threads(self.threads)
    }

    fn validate(&self, d: usize, labels: usize) -> Result<()> {
        if self.k == 0 || self.k > d.min(labels) {
            return Err(Error::InvalidArgument(format!(
                "rank k = {} must lie in 1..={} (min of {d} features and {labels} labels)",
                self.k,
                d.min(labels)
            )));
        }
        if self.outer_iters == 0 {
            return Err(Error::InvalidArgument("outer_iters must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        for (name, v) in [("cg_tol", self.cg_tol), ("tron_tol", self.tron_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        let scale = self.effective_init_scale();
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("init_scale must be >= 0, got {scale}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    W,
    H,
}

/// One completed half-step of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfStep {
    pub factor: Factor,
    /// Objective after the step.
    pub objective: f64,
    pub seconds: f64,
    /// For H-steps, summed over labels.
    pub report: SolverReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub initial_objective: f64,
    pub steps: Vec<HalfStep>,
    /// Labels with no observed instance; their `h_j` is zero.
    pub unobserved_labels: Vec<usize>,
    /// Per-label normal equations that needed the CG fallback.
    pub h_fallbacks: usize,
}

impl TrainTrace {
    /// Initial objective followed by the value after every half-step.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.steps.iter().map(|s| s.objective))
            .collect()
    }

    /// `step objective seconds inner_iters` lines, step 0 being the start.
    pub fn to_lines(&self) -> String {
        let mut out = format!("0 {:.16e} 0 0\n", self.initial_objective);
        for (t, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{} {:.16e} {:.6} {}\n",
                t + 1,
                s.objective,
                s.seconds,
                s.report.iterations
            ));
        }
        out
    }
}

/// `W = 0` and `H` uniform in `[-scale, scale]` from the seeded generator.
pub fn init_factors(config: &TrainConfig, d: usize, labels: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    if config.k == 0 || config.k > d.min(labels) {
        return Err(Error::InvalidArgument(format!(
            "rank k = {} must lie in 1..={}",
            config.k,
            d.min(labels)
        )));
    }
    let scale = config.effective_init_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let h = DenseMatrix::from_fn(labels, config.k, |_, _| {
        if scale > 0.0 {
            rng.gen_range(-scale..=scale)
        } else {
            0.0
        }
    });
    Ok((DenseMatrix::zeros(d, config.k), h))
}

/// Inner-solve settings shared by both steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub cg_tol: f64,
    pub tron_tol: f64,
    pub max_iter: usize,
}

impl From<&TrainConfig> for Tolerances {
    fn from(c: &TrainConfig) -> Self {
        Self {
            cg_tol: c.cg_tol,
            tron_tol: c.tron_tol,
            max_iter: c.inner_max_iter,
        }
    }
}

/// Result of an H-step.
#[derive(Debug, Clone)]
pub struct HUpdate {
    pub h: DenseMatrix,
    pub report: SolverReport,
    pub unobserved: Vec<usize>,
    pub fallbacks: usize,
}

/// Solves every label's k-dimensional problem independently.
///
/// Squared loss uses the normal equations directly (one shared factorization
/// when every label is observed on every instance); the other losses use
/// TRON warm-started from `h_prev`.
#[allow(clippy::too_many_arguments)]
pub fn update_h(
    w: &DenseMatrix,
    h_prev: &DenseMatrix,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
    kind: LossKind,
    lambda: f64,
    tol: Tolerances,
    exec: Exec,
) -> Result<HUpdate> {
    if h_prev.rows() != labels.n_labels() || h_prev.cols() != w.cols() {
        return Err(Error::dims(
            "update_h",
            format!("{}x{} H", labels.n_labels(), w.cols()),
            format!("{}x{}", h_prev.rows(), h_prev.cols()),
        ));
    }
    let a = dense_spmm(x, w)?;
    if a.rows() != labels.n_instances() {
        return Err(Error::dims("update_h", format!("X with {} rows", labels.n_instances()), x.rows()));
    }
    let k = w.cols();
    match labels {
        Labels::Full(y) => {
            if kind != LossKind::Squared {
                return Err(Error::InvalidArgument(
                    "full-label kernels require the squared loss".into(),
                ));
            }
            // (A^T A + lambda I) h_j = A^T y_j for every label at once
            let mut gram = a.gram();
            for c in 0..k {
                gram.as_mut_slice()[c * k + c] += lambda;
            }
            let rhs = transpose_spmm(y, &a)?;
            let mut report = SolverReport { converged: true, ..SolverReport::default() };
            let mut fallbacks = 0;
            let h = match cholesky(&gram) {
                Some(l) => {
                    let mut h = rhs.clone();
                    for j in 0..h.rows() {
                        cholesky_solve(&l, h.row_mut(j));
                    }
                    h
                }
                None => {
                    let mut h = h_prev.clone();
                    for j in 0..h.rows() {
                        let r = cg_fallback(&gram, rhs.row(j), h.row_mut(j), tol);
                        merge(&mut report, &r);
                        fallbacks += 1;
                    }
                    h
                }
            };
            Ok(HUpdate { h, report, unobserved: Vec::new(), fallbacks })
        }
        Labels::Missing(omega) => {
            let solve = |j: usize| solve_label(&a, omega, j, h_prev.row(j), kind, lambda, tol);
            let results: Vec<Result<LabelSolve>> = if exec.is_parallel() {
                (0..omega.n_labels()).into_par_iter().map(solve).collect()
            } else {
                (0..omega.n_labels()).map(solve).collect()
            };
            let mut h = DenseMatrix::zeros(omega.n_labels(), k);
            let mut report = SolverReport { converged: true, ..SolverReport::default() };
            let mut unobserved = Vec::new();
            let mut fallbacks = 0;
            for (j, r) in results.into_iter().enumerate() {
                let r = r?;
                h.row_mut(j).copy_from_slice(&r.h);
                if r.unobserved {
                    unobserved.push(j);
                }
                fallbacks += usize::from(r.fallback);
                merge(&mut report, &r.report);
            }
            Ok(HUpdate { h, report, unobserved, fallbacks })
        }
    }
}

fn merge(total: &mut SolverReport, r: &SolverReport) {
    total.iterations += r.iterations;
    total.objective_evals += r.objective_evals;
    total.hv_evals += r.hv_evals;
    total.final_residual_norm = total.final_residual_norm.max(r.final_residual_norm);
    total.tolerance = total.tolerance.max(r.tolerance);
    total.converged &= r.converged;
    total.breakdown |= r.breakdown;
}

struct LabelSolve {
    h: Vec<f64>,
    report: SolverReport,
    unobserved: bool,
    fallback: bool,
}

fn solve_label(
    a: &DenseMatrix,
    omega: &ObservationSet,
    j: usize,
    h_prev: &[f64],
    kind: LossKind,
    lambda: f64,
    tol: Tolerances,
) -> Result<LabelSolve> {
    let k = a.cols();
    let entries = omega.col_entries(j);
    if entries.is_empty() {
        return Ok(LabelSolve {
            h: vec![0.0; k],
            report: SolverReport { converged: true, ..SolverReport::default() },
            unobserved: true,
            fallback: false,
        });
    }
    let rows: Vec<(&[f64], f64)> = entries
        .iter()
        .map(|&p| (a.row(omega.instance(p)), kind.encode_label(omega.value(p))))
        .collect();

    if kind == LossKind::Squared {
        let mut gram = DenseMatrix::zeros(k, k);
        let mut rhs = vec![0.0; k];
        for &(ai, y) in &rows {
            for r in 0..k {
                axpy(ai[r], ai, gram.row_mut(r));
            }
            axpy(y, ai, &mut rhs);
        }
        for c in 0..k {
            gram.as_mut_slice()[c * k + c] += lambda;
        }
        return Ok(match cholesky(&gram) {
            Some(l) => {
                cholesky_solve(&l, &mut rhs);
                LabelSolve {
                    h: rhs,
                    report: SolverReport { converged: true, ..SolverReport::default() },
                    unobserved: false,
                    fallback: false,
                }
            }
            None => {
                let mut h = h_prev.to_vec();
                let report = cg_fallback(&gram, &rhs, &mut h, tol);
                LabelSolve { h, report, unobserved: false, fallback: true }
            }
        });
    }

    let value = |h: &[f64]| {
        rows.iter().map(|&(ai, y)| kind.value(y, dot(ai, h))).sum::<f64>() + 0.5 * lambda * dot(h, h)
    };
    let grad = |h: &[f64], out: &mut [f64]| {
        out.copy_from_slice(h);
        out.iter_mut().for_each(|v| *v *= lambda);
        for &(ai, y) in &rows {
            axpy(kind.grad(y, dot(ai, h)), ai, out);
        }
    };
    let hv = |h: &[f64], s: &[f64], out: &mut [f64]| {
        out.copy_from_slice(s);
        out.iter_mut().for_each(|v| *v *= lambda);
        for &(ai, y) in &rows {
            axpy(kind.curv(y, dot(ai, h)) * dot(ai, s), ai, out);
        }
    };
    let (h, report) = tron_minimize(value, grad, hv, h_prev, tol.tron_tol, tol.max_iter)?;
    Ok(LabelSolve { h, report, unobserved: false, fallback: false })
}

/// Lower Cholesky factor of a small SPD matrix, `None` if not positive definite.
fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let k = a.rows();
    let scale = (0..k).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    let mut l = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let s = a.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                // relative pivot floor guards against numerically singular systems
                if !(s > 1e-13 * scale) {
                    return None;
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` in place.
fn cholesky_solve(l: &DenseMatrix, b: &mut [f64]) {
    let k = l.rows();
    for i in 0..k {
        b[i] = (b[i] - dot(&l.row(i)[..i], &b[..i])) / l.get(i, i);
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for r in i + 1..k {
            s -= l.get(r, i) * b[r];
        }
        b[i] = s / l.get(i, i);
    }
}

/// CG on `G h = rhs` from the current `h`, for singular normal equations.
fn cg_fallback(g: &DenseMatrix, rhs: &[f64], h: &mut [f64], tol: Tolerances) -> SolverReport {
    let k = g.rows();
    let mut g0 = vec![0.0; k];
    for r in 0..k {
        g0[r] = dot(g.row(r), h) - rhs[r];
    }
    let (sol, report) = cg_solve(
        |s, out| {
            for r in 0..k {
                out[r] = dot(g.row(r), s);
            }
        },
        &g0,
        h,
        tol.cg_tol,
        tol.max_iter.max(k),
    );
    h.copy_from_slice(&sol);
    report
}

/// Minimizes the W-subproblem warm-started from `w_prev`.
///
/// Squared loss solves the quadratic with CG; the other losses use TRON.
/// Inner non-convergence is reported, not fatal.
#[allow(clippy::too_many_arguments)]
pub fn update_w(
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
    kind: LossKind,
    lambda: f64,
    tol: Tolerances,
    w_prev: &DenseMatrix,
    exec: Exec,
) -> Result<(DenseMatrix, SolverReport)> {
    if w_prev.shape() != (x.cols(), h.cols()) {
        return Err(Error::dims(
            "update_w",
            format!("{}x{} W", x.cols(), h.cols()),
            format!("{}x{}", w_prev.rows(), w_prev.cols()),
        ));
    }
    let mut sub = WSubproblem::new(x, h, labels, kind, lambda, exec)?;
    let w0 = w_prev.as_slice();
    let (w, report) = if kind == LossKind::Squared {
        let mut g0 = vec![0.0; w0.len()];
        sub.grad_into(w0, &mut g0);
        // the squared norm can overflow even when every entry is finite
        if !dot(&g0, &g0).is_finite() {
            return Err(Error::NonFinite("W-step gradient".into()));
        }
        let mut overflow = false;
        let solved = cg_solve(
            |s, out| {
                sub.hv_into(s, out);
                overflow |= !out.iter().all(|v| v.is_finite());
            },
            &g0,
            w0,
            tol.cg_tol,
            tol.max_iter,
        );
        if overflow {
            return Err(Error::NonFinite("W-step Hessian-vector product".into()));
        }
        solved
    } else {
        let opts = TronOptions {
            tol: tol.tron_tol,
            max_iter: tol.max_iter,
            ..TronOptions::default()
        };
        tron_minimize_with(&mut sub, w0, &opts)?
    };
    Ok((DenseMatrix::new(x.cols(), h.cols(), w)?, report))
}

/// Runs `config.outer_iters` rounds of W-step then H-step.
pub fn train(
    config: &TrainConfig,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
) -> Result<(FactorModel, TrainTrace)> {
    let (n, d, nl) = (labels.n_instances(), x.cols(), labels.n_labels());
    if x.rows() != n {
        return Err(Error::dims("train", format!("X with {n} rows"), x.rows()));
    }
    config.validate(d, nl)?;
    let kind = config.loss;

    let full_grid;
    let labels = match (config.mode, labels, kind) {
        (TrainMode::Full, Labels::Full(_), LossKind::Squared) => labels,
        (TrainMode::Full, Labels::Missing(_), _) => {
            return Err(Error::InvalidArgument("mode=full needs fully observed labels".into()))
        }
        (TrainMode::Full, Labels::Full(_), _) => {
            return Err(Error::InvalidArgument(format!(
                "mode=full supports the squared loss only, got {kind}"
            )))
        }
        (TrainMode::Auto, Labels::Full(_), LossKind::Squared) => labels,
        (_, Labels::Full(y), _) => {
            full_grid = ObservationSet::full_grid(y);
            Labels::Missing(&full_grid)
        }
        (_, Labels::Missing(_), _) => labels,
    };
    log::debug!(
        "training k={} lambda={} loss={kind} kernels={}",
        config.k,
        config.lambda,
        if matches!(labels, Labels::Full(_)) { "full" } else { "missing" }
    );

    let (w, h) = init_factors(config, d, nl)?;
    if config.effective_init_scale() == 0.0 {
        log::warn!("init_scale is 0: H starts at zero, so the first W-step returns W = 0");
    }
    let pool = exec::thread_pool(config.threads)?;
    exec::run_with(pool.as_ref(), || run_rounds(config, x, labels, w, h))
}

fn run_rounds(
    config: &TrainConfig,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
    mut w: DenseMatrix,
    mut h: DenseMatrix,
) -> Result<(FactorModel, TrainTrace)> {
    let (kind, lambda, exec) = (config.loss, config.lambda, config.exec());
    let tol = Tolerances::from(config);
    let objective = |w: &DenseMatrix, h: &DenseMatrix, what: &str| -> Result<f64> {
        let f = objective_for(w, h, x, labels, kind, lambda)?;
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("objective became {f} after {what}")));
        }
        Ok(f)
    };
    let mut trace = TrainTrace {
        initial_objective: objective(&w, &h, "initialization")?,
        ..TrainTrace::default()
    };
    for round in 1..=config.outer_iters {
        let start = Instant::now();
        let (w_new, report) = update_w(&h, x, labels, kind, lambda, tol, &w, exec)?;
        w = w_new;
        trace.steps.push(HalfStep {
            factor: Factor::W,
            objective: objective(&w, &h, &format!("W-step of round {round}"))?,
            seconds: start.elapsed().as_secs_f64(),
            report,
        });

        let start = Instant::now();
        let up = update_h(&w, &h, x, labels, kind, lambda, tol, exec)?;
        h = up.h;
        if round == 1 && !up.unobserved.is_empty() {
            log::warn!("{} labels have no observed entries; their predictions are 0", up.unobserved.len());
        }
        trace.unobserved_labels = up.unobserved;
        trace.h_fallbacks += up.fallbacks;
        trace.steps.push(HalfStep {
            factor: Factor::H,
            objective: objective(&w, &h, &format!("H-step of round {round}"))?,
            seconds: start.elapsed().as_secs_f64(),
            report: up.report,
        });
        log::info!(
            "round {round}: objective {:.10e}",
            trace.steps.last().map_or(f64::NAN, |s| s.objective)
        );
    }
    if trace.h_fallbacks > 0 {
        log::warn!("{} singular per-label systems were solved by CG", trace.h_fallbacks);
    }
    Ok((FactorModel::new(w, h, kind, lambda)?, trace))
}

/// `(X W) H^T`, never forming `Z`.
pub fn predict_scores(model: &FactorModel, x: &SparseRowMatrix) -> Result<DenseMatrix> {
    if x.cols() != model.n_features() {
        return Err(Error::dims(
            "predict_scores",
            format!("{} features", model.n_features()),
            x.cols(),
        ));
    }
    dense_spmm(x, &model.w)?.matmul_transposed(&model.h)
}

/// The `k_top` best labels per instance, best first, ties to the lower index.
pub fn predict_topk(model: &FactorModel, x: &SparseRowMatrix, k_top: usize) -> Result<Vec<Vec<usize>>> {
    if k_top == 0 || k_top > model.n_labels() {
        return Err(Error::InvalidArgument(format!(
            "K must lie in 1..={}, got {k_top}",
            model.n_labels()
        )));
    }
    let scores = predict_scores(model, x)?;
    Ok((0..scores.rows()).map(|i| top_k_labels(scores.row(i), k_top)).collect())
}

/// `|grad_W J|` and `|grad_H J|` at the model's factors.
pub fn gradient_norms(model: &FactorModel, x: &SparseRowMatrix, labels: Labels<'_>) -> Result<(f64, f64)> {
    let full_grid;
    let labels = match (labels, model.kind) {
        (Labels::Full(y), kind) if kind != LossKind::Squared => {
            full_grid = ObservationSet::full_grid(y);
            Labels::Missing(&full_grid)
        }
        _ => labels,
    };
    let mut sub = WSubproblem::new(x, &model.h, labels, model.kind, model.lambda, Exec::Reference)?;
    let mut gw = vec![0.0; model.w.as_slice().len()];
    sub.grad_into(model.w.as_slice(), &mut gw);
    let gh = crate::objective::grad_h(&model.w, &model.h, x, labels, model.kind, model.lambda)?;
    Ok((norm(&gw), norm(&gh)))
}
