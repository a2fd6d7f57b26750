//! The factorized objective
//!
//! ```text
//! J(W, H) = sum_{(i,j) in Omega} l(Y_ij, x_i^T W h_j) + lambda/2 (|W|_F^2 + |H|_F^2)
//! ```
//!
//! and the structured gradient / Hessian-vector kernels of its W-subproblem
//! `g(w)`, `w = vec(W)`. Vectors over `W` are flattened row-major: entry
//! `(t, c)` of the `d x k` matrix lives at `t * k + c`.
//!
//! With labels observed on `Omega` the kernels never form the virtual
//! features `h_j (x) x_i`; they go through `A = XW`, a sparse coefficient
//! matrix `D` (or `U`) supported on `Omega`, and `X^T (D H)`. With every label
//! observed and the squared loss, the `Omega`-sized step is replaced by
//! `X^T (A H^T H - Y H)`, whose cost depends on `nnz(Y)` only.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernels::{
    dense_spmm, dense_spmm_into, omega_scatter_mm, omega_scatter_mm_into, omega_scores,
    omega_scores_into, transpose_spmm, transpose_spmm_into,
};
use crate::loss::LossKind;
use crate::matrix::{axpy, dot, DenseMatrix, SparseRowMatrix};
use crate::observation::ObservationSet;
use crate::solver::TwiceDifferentiable;

/// Labels a subproblem is fitted to.
#[derive(Debug, Clone, Copy)]
pub enum Labels<'a> {
    /// Loss summed over the observed cells only.
    Missing(&'a ObservationSet),
    /// Every cell observed; `Y` stores the positives. Squared loss only.
    Full(&'a SparseRowMatrix),
}

impl Labels<'_> {
    pub fn n_instances(&self) -> usize {
        match self {
            Labels::Missing(o) => o.n_instances(),
            Labels::Full(y) => y.rows(),
        }
    }

    pub fn n_labels(&self) -> usize {
        match self {
            Labels::Missing(o) => o.n_labels(),
            Labels::Full(y) => y.cols(),
        }
    }
}

fn check_factors(
    op: &'static str,
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    n: usize,
    labels: usize,
) -> Result<()> {
    if x.cols() != w.rows() {
        return Err(Error::dims(op, format!("W with {} rows", x.cols()), w.rows()));
    }
    if w.cols() != h.cols() {
        return Err(Error::dims(op, format!("H with rank {}", w.cols()), h.cols()));
    }
    if x.rows() != n {
        return Err(Error::dims(op, format!("X with {n} rows"), x.rows()));
    }
    if h.rows() != labels {
        return Err(Error::dims(op, format!("H with {labels} rows"), h.rows()));
    }
    Ok(())
}

fn check_direction(op: &'static str, w: &DenseMatrix, s: &DenseMatrix) -> Result<()> {
    if w.shape() != s.shape() {
        return Err(Error::dims(
            op,
            format!("{}x{} direction", w.rows(), w.cols()),
            format!("{}x{}", s.rows(), s.cols()),
        ));
    }
    Ok(())
}

/// Sum of `l` over `omega` for the scores `s_p`.
fn omega_loss(kind: LossKind, omega: &ObservationSet, scores: &[f64]) -> f64 {
    omega
        .values()
        .iter()
        .zip(scores)
        .map(|(&y, &s)| kind.value(kind.encode_label(y), s))
        .sum()
}

/// `J(W, H)` for labels observed on `omega`.
pub fn objective_value(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    omega: &ObservationSet,
    kind: LossKind,
    lambda: f64,
) -> Result<f64> {
    check_factors("objective_value", w, h, x, omega.n_instances(), omega.n_labels())?;
    let a = dense_spmm(x, w)?;
    let scores = omega_scores(&a, h, omega)?;
    Ok(omega_loss(kind, omega, &scores)
        + 0.5 * lambda * (w.frobenius_norm_sq() + h.frobenius_norm_sq()))
}

/// `1/2 |Y - X W H^T|_F^2` via `A = XW` without forming the `n x L` residual.
fn full_squared_loss(a: &DenseMatrix, h: &DenseMatrix, y: &SparseRowMatrix, m: &DenseMatrix) -> f64 {
    let mut cross = 0.0;
    for i in 0..y.rows() {
        let (idx, vals) = y.row(i);
        let a_row = a.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            cross += v * dot(a_row, h.row(j));
        }
    }
    let quad = dot(a.gram().as_slice(), m.as_slice());
    (0.5 * y.frobenius_norm_sq() - cross + 0.5 * quad).max(0.0)
}

/// `J(W, H)` for the squared loss with every label observed.
pub fn objective_value_full(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    y: &SparseRowMatrix,
    lambda: f64,
) -> Result<f64> {
    check_factors("objective_value_full", w, h, x, y.rows(), y.cols())?;
    let a = dense_spmm(x, w)?;
    Ok(full_squared_loss(&a, h, y, &h.gram())
        + 0.5 * lambda * (w.frobenius_norm_sq() + h.frobenius_norm_sq()))
}

/// `J(W, H)` dispatching on the label representation.
pub fn objective_for(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
    kind: LossKind,
    lambda: f64,
) -> Result<f64> {
    match labels {
        Labels::Missing(omega) => objective_value(w, h, x, omega, kind, lambda),
        Labels::Full(y) => {
            require_squared(kind)?;
            objective_value_full(w, h, x, y, lambda)
        }
    }
}

fn require_squared(kind: LossKind) -> Result<()> {
    if kind != LossKind::Squared {
        return Err(Error::InvalidArgument(format!(
            "the full-label path needs the squared loss, got {kind}"
        )));
    }
    Ok(())
}

/// Gradient of `g(w)` with labels on `omega`:
/// `vec(X^T (D H)) + lambda w`, `D_ij = l'(Y_ij, a_i^T h_j)`.
pub fn grad_w_missing(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    omega: &ObservationSet,
    kind: LossKind,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_factors("grad_w_missing", w, h, x, omega.n_instances(), omega.n_labels())?;
    let a = dense_spmm(x, w)?;
    let mut d = omega_scores(&a, h, omega)?;
    for (dp, &y) in d.iter_mut().zip(omega.values()) {
        *dp = kind.grad(kind.encode_label(y), *dp);
    }
    let dh = omega_scatter_mm(&d, h, omega)?;
    let mut g = transpose_spmm(x, &dh)?.into_vec();
    axpy(lambda, w.as_slice(), &mut g);
    Ok(g)
}

/// Hessian of `g` at `w` applied to `vec(S)`:
/// `vec(X^T (U H)) + lambda s`, `U_ij = l''(Y_ij, a_i^T h_j) b_i^T h_j`, `B = XS`.
pub fn hv_w_missing(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    omega: &ObservationSet,
    kind: LossKind,
    lambda: f64,
    s: &DenseMatrix,
) -> Result<Vec<f64>> {
    check_factors("hv_w_missing", w, h, x, omega.n_instances(), omega.n_labels())?;
    check_direction("hv_w_missing", w, s)?;
    let a = dense_spmm(x, w)?;
    let b = dense_spmm(x, s)?;
    let scores = omega_scores(&a, h, omega)?;
    let mut u = omega_scores(&b, h, omega)?;
    for ((up, &sc), &y) in u.iter_mut().zip(&scores).zip(omega.values()) {
        *up *= kind.curv(kind.encode_label(y), sc);
    }
    let uh = omega_scatter_mm(&u, h, omega)?;
    let mut out = transpose_spmm(x, &uh)?.into_vec();
    axpy(lambda, s.as_slice(), &mut out);
    Ok(out)
}

/// Full-label squared-loss gradient: `vec(X^T (A M - B)) + lambda w` with
/// `A = XW`, `B = YH`, `M = H^T H`.
pub fn grad_w_full_squared(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    y: &SparseRowMatrix,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_factors("grad_w_full_squared", w, h, x, y.rows(), y.cols())?;
    let a = dense_spmm(x, w)?;
    let b = dense_spmm(y, h)?;
    let m = h.gram();
    let mut am = a.matmul(&m)?;
    axpy(-1.0, b.as_slice(), am.as_mut_slice());
    let mut g = transpose_spmm(x, &am)?.into_vec();
    axpy(lambda, w.as_slice(), &mut g);
    Ok(g)
}

/// Full-label squared-loss Hessian-vector product: `vec(X^T (X S M)) + lambda s`.
/// The Hessian does not depend on `W`.
pub fn hv_w_full_squared(
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    s: &DenseMatrix,
    lambda: f64,
) -> Result<Vec<f64>> {
    if x.cols() != s.rows() || s.cols() != h.cols() {
        return Err(Error::dims(
            "hv_w_full_squared",
            format!("{}x{} direction", x.cols(), h.cols()),
            format!("{}x{}", s.rows(), s.cols()),
        ));
    }
    let a = dense_spmm(x, s)?;
    let am = a.matmul(&h.gram())?;
    let mut out = transpose_spmm(x, &am)?.into_vec();
    axpy(lambda, s.as_slice(), &mut out);
    Ok(out)
}

/// Reference gradient that materializes every virtual feature
/// `x~_ij = h_j (x) x_i` and accumulates `l'(Y_ij, w^T x~_ij) x~_ij + lambda w`.
///
/// Costs `O(|Omega| d k)`; meant for checking the structured kernels.
pub fn naive_grad_w(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    omega: &ObservationSet,
    kind: LossKind,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_factors("naive_grad_w", w, h, x, omega.n_instances(), omega.n_labels())?;
    let (d, k) = w.shape();
    let mut grad = w.as_slice().iter().map(|v| lambda * v).collect::<Vec<_>>();
    let mut feature = vec![0.0; d * k];
    for (i, j, y) in omega.iter() {
        feature.fill(0.0);
        let (idx, vals) = x.row(i);
        for (&t, &xv) in idx.iter().zip(vals) {
            for c in 0..k {
                feature[t * k + c] = xv * h.get(j, c);
            }
        }
        let pred = dot(w.as_slice(), &feature);
        let coef = kind.grad(kind.encode_label(y), pred);
        axpy(coef, &feature, &mut grad);
    }
    Ok(grad)
}

/// Gradient of `J` with respect to `H` (flattened row-major `L x k`).
pub fn grad_h(
    w: &DenseMatrix,
    h: &DenseMatrix,
    x: &SparseRowMatrix,
    labels: Labels<'_>,
    kind: LossKind,
    lambda: f64,
) -> Result<Vec<f64>> {
    check_factors("grad_h", w, h, x, labels.n_instances(), labels.n_labels())?;
    let a = dense_spmm(x, w)?;
    let k = h.cols();
    let mut g: Vec<f64> = h.as_slice().iter().map(|v| lambda * v).collect();
    match labels {
        Labels::Missing(omega) => {
            let scores = omega_scores(&a, h, omega)?;
            for (p, (i, j, y)) in omega.iter().enumerate() {
                let coef = kind.grad(kind.encode_label(y), scores[p]);
                axpy(coef, a.row(i), &mut g[j * k..(j + 1) * k]);
            }
        }
        Labels::Full(y) => {
            require_squared(kind)?;
            // H (A^T A) - Y^T A
            let hg = h.matmul(&a.gram())?;
            axpy(1.0, hg.as_slice(), &mut g);
            let yta = transpose_spmm(y, &a)?;
            axpy(-1.0, yta.as_slice(), &mut g);
        }
    }
    Ok(g)
}

/// The W-subproblem `g(w)` for fixed `H`, with reusable workspaces.
///
/// Per-point quantities (`A = XW`, scores, loss curvature) are cached for the
/// last point passed to [`WSubproblem::value`] or
/// [`WSubproblem::gradient`], so a solver that evaluates value, gradient and
/// several Hessian-vector products at one iterate computes `A` once.
pub struct WSubproblem<'a> {
    x: &'a SparseRowMatrix,
    h: &'a DenseMatrix,
    labels: Labels<'a>,
    kind: LossKind,
    lambda: f64,
    exec: Exec,
    ws: Workspace,
}

struct Workspace {
    point: Option<Vec<f64>>,
    a: DenseMatrix,
    b: DenseMatrix,
    nk: DenseMatrix,
    dk: DenseMatrix,
    scores: Vec<f64>,
    coef: Vec<f64>,
    curv: Vec<f64>,
    u: Vec<f64>,
    m: DenseMatrix,
    yh: DenseMatrix,
    full_loss: f64,
}

impl<'a> WSubproblem<'a> {
    pub fn new(
        x: &'a SparseRowMatrix,
        h: &'a DenseMatrix,
        labels: Labels<'a>,
        kind: LossKind,
        lambda: f64,
        exec: Exec,
    ) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let (n, labels_count) = (labels.n_instances(), labels.n_labels());
        if x.rows() != n {
            return Err(Error::dims("WSubproblem", format!("X with {n} rows"), x.rows()));
        }
        if h.rows() != labels_count {
            return Err(Error::dims(
                "WSubproblem",
                format!("H with {labels_count} rows"),
                h.rows(),
            ));
        }
        let (d, k) = (x.cols(), h.cols());
        let omega_len = match labels {
            Labels::Missing(o) => o.len(),
            Labels::Full(_) => 0,
        };
        let (m, yh) = match labels {
            Labels::Full(y) => {
                require_squared(kind)?;
                (h.gram(), dense_spmm(y, h)?)
            }
            Labels::Missing(_) => (DenseMatrix::zeros(0, 0), DenseMatrix::zeros(0, 0)),
        };
        Ok(Self {
            x,
            h,
            labels,
            kind,
            lambda,
            exec,
            ws: Workspace {
                point: None,
                a: DenseMatrix::zeros(n, k),
                b: DenseMatrix::zeros(n, k),
                nk: DenseMatrix::zeros(n, k),
                dk: DenseMatrix::zeros(d, k),
                scores: vec![0.0; omega_len],
                coef: vec![0.0; omega_len],
                curv: vec![0.0; omega_len],
                u: vec![0.0; omega_len],
                m,
                yh,
                full_loss: 0.0,
            },
        })
    }

    pub fn rows(&self) -> usize {
        self.x.cols()
    }

    pub fn rank(&self) -> usize {
        self.h.cols()
    }

    fn as_matrix(&self, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec_unchecked(self.rows(), self.rank(), v.to_vec())
    }

    /// Recomputes the per-point caches unless `w` is the cached point.
    fn prepare(&mut self, w: &[f64]) {
        if self.ws.point.as_deref() == Some(w) {
            return;
        }
        let wm = self.as_matrix(w);
        dense_spmm_into(self.x, &wm, &mut self.ws.a, self.exec).expect("workspace shapes");
        match self.labels {
            Labels::Missing(omega) => {
                omega_scores_into(&self.ws.a, self.h, omega, &mut self.ws.scores, self.exec)
                    .expect("workspace shapes");
                let kind = self.kind;
                for (p, &y) in omega.values().iter().enumerate() {
                    let a = kind.encode_label(y);
                    let s = self.ws.scores[p];
                    self.ws.coef[p] = kind.grad(a, s);
                    self.ws.curv[p] = kind.curv(a, s);
                }
            }
            Labels::Full(y) => {
                self.ws.full_loss = full_squared_loss(&self.ws.a, self.h, y, &self.ws.m);
            }
        }
        self.ws.point = Some(w.to_vec());
    }

    /// Loss part of `g(w)` plus `lambda/2 |w|^2`.
    pub fn eval(&mut self, w: &[f64]) -> f64 {
        self.prepare(w);
        let loss = match self.labels {
            Labels::Missing(omega) => omega_loss(self.kind, omega, &self.ws.scores),
            Labels::Full(_) => self.ws.full_loss,
        };
        loss + 0.5 * self.lambda * dot(w, w)
    }

    pub fn grad_into(&mut self, w: &[f64], out: &mut [f64]) {
        self.prepare(w);
        match self.labels {
            Labels::Missing(omega) => {
                omega_scatter_mm_into(&self.ws.coef, self.h, omega, &mut self.ws.nk, self.exec)
                    .expect("workspace shapes");
            }
            Labels::Full(_) => {
                // A M - Y H
                let am = self.ws.a.matmul(&self.ws.m).expect("workspace shapes");
                self.ws.nk = am;
                axpy(-1.0, self.ws.yh.as_slice(), self.ws.nk.as_mut_slice());
            }
        }
        transpose_spmm_into(self.x, &self.ws.nk, &mut self.ws.dk, self.exec)
            .expect("workspace shapes");
        out.copy_from_slice(self.ws.dk.as_slice());
        axpy(self.lambda, w, out);
    }

    /// Hessian at the last prepared point applied to `s`.
    pub fn hv_into(&mut self, s: &[f64], out: &mut [f64]) {
        let sm = self.as_matrix(s);
        dense_spmm_into(self.x, &sm, &mut self.ws.b, self.exec).expect("workspace shapes");
        match self.labels {
            Labels::Missing(omega) => {
                omega_scores_into(&self.ws.b, self.h, omega, &mut self.ws.u, self.exec)
                    .expect("workspace shapes");
                for (u, &c) in self.ws.u.iter_mut().zip(&self.ws.curv) {
                    *u *= c;
                }
                omega_scatter_mm_into(&self.ws.u, self.h, omega, &mut self.ws.nk, self.exec)
                    .expect("workspace shapes");
            }
            Labels::Full(_) => {
                self.ws.nk = self.ws.b.matmul(&self.ws.m).expect("workspace shapes");
            }
        }
        transpose_spmm_into(self.x, &self.ws.nk, &mut self.ws.dk, self.exec)
            .expect("workspace shapes");
        out.copy_from_slice(self.ws.dk.as_slice());
        axpy(self.lambda, s, out);
    }
}

impl TwiceDifferentiable for WSubproblem<'_> {
    fn dim(&self) -> usize {
        self.rows() * self.rank()
    }

    fn value(&mut self, w: &[f64]) -> f64 {
        self.eval(w)
    }

    fn gradient(&mut self, w: &[f64], out: &mut [f64]) {
        self.grad_into(w, out)
    }

    fn hess_vec(&mut self, w: &[f64], s: &[f64], out: &mut [f64]) {
        self.prepare(w);
        self.hv_into(s, out)
    }
}
