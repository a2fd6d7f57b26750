//! Structured products shared by the objective, trainer and predictor.
//!
//! Each kernel has an allocating form that runs in reference mode and an
//! `_into` form that writes into a caller-owned buffer under a chosen [`Exec`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matrix::{axpy, dot, DenseMatrix, SparseRowMatrix};
use crate::observation::ObservationSet;

/// `X * S` for sparse `X` (n x d) and dense `S` (d x k).
pub fn dense_spmm(x: &SparseRowMatrix, s: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(x.rows(), s.cols());
    dense_spmm_into(x, s, &mut out, Exec::Reference)?;
    Ok(out)
}

pub fn dense_spmm_into(
    x: &SparseRowMatrix,
    s: &DenseMatrix,
    out: &mut DenseMatrix,
    exec: Exec,
) -> Result<()> {
    if x.cols() != s.rows() {
        return Err(Error::dims(
            "dense_spmm",
            format!("{} rows in dense factor", x.cols()),
            s.rows(),
        ));
    }
    if out.shape() != (x.rows(), s.cols()) {
        return Err(Error::dims(
            "dense_spmm",
            format!("{}x{} output", x.rows(), s.cols()),
            format!("{}x{}", out.rows(), out.cols()),
        ));
    }
    let k = s.cols();
    if k == 0 {
        return Ok(());
    }
    let row_kernel = |i: usize, out_row: &mut [f64]| {
        out_row.fill(0.0);
        let (idx, vals) = x.row(i);
        for (&t, &v) in idx.iter().zip(vals) {
            axpy(v, s.row(t), out_row);
        }
    };
    let buf = out.as_mut_slice();
    if exec.is_parallel() {
        buf.par_chunks_mut(k)
            .enumerate()
            .for_each(|(i, r)| row_kernel(i, r));
    } else {
        buf.chunks_mut(k).enumerate().for_each(|(i, r)| row_kernel(i, r));
    }
    Ok(())
}

/// `X^T * G` for sparse `X` (n x d) and dense `G` (n x k).
pub fn transpose_spmm(x: &SparseRowMatrix, g: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(x.cols(), g.cols());
    transpose_spmm_into(x, g, &mut out, Exec::Reference)?;
    Ok(out)
}

pub fn transpose_spmm_into(
    x: &SparseRowMatrix,
    g: &DenseMatrix,
    out: &mut DenseMatrix,
    exec: Exec,
) -> Result<()> {
    if x.rows() != g.rows() {
        return Err(Error::dims(
            "transpose_spmm",
            format!("{} rows in dense factor", x.rows()),
            g.rows(),
        ));
    }
    if out.shape() != (x.cols(), g.cols()) {
        return Err(Error::dims(
            "transpose_spmm",
            format!("{}x{} output", x.cols(), g.cols()),
            format!("{}x{}", out.rows(), out.cols()),
        ));
    }
    let k = g.cols();
    let accumulate = |rows: std::ops::Range<usize>, acc: &mut [f64]| {
        for i in rows {
            let g_row = g.row(i);
            let (idx, vals) = x.row(i);
            for (&t, &v) in idx.iter().zip(vals) {
                axpy(v, g_row, &mut acc[t * k..(t + 1) * k]);
            }
        }
    };
    let n = x.rows();
    let workers = rayon::current_num_threads();
    if !exec.is_parallel() || workers <= 1 || n < 2 * workers {
        out.fill(0.0);
        accumulate(0..n, out.as_mut_slice());
        return Ok(());
    }
    // Fixed chunk boundaries and an ordered final sum keep the result
    // independent of scheduling.
    let chunk = n.div_ceil(workers);
    let partials: Vec<Vec<f64>> = (0..workers)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; out.rows() * k];
            accumulate(c * chunk..((c + 1) * chunk).min(n), &mut acc);
            acc
        })
        .collect();
    let buf = out.as_mut_slice();
    buf.fill(0.0);
    for p in &partials {
        axpy(1.0, p, buf);
    }
    Ok(())
}

/// `<A[i,:], H[j,:]>` for every observed `(i, j)`, in canonical order.
pub fn omega_scores(a: &DenseMatrix, h: &DenseMatrix, omega: &ObservationSet) -> Result<Vec<f64>> {
    let mut out = vec![0.0; omega.len()];
    omega_scores_into(a, h, omega, &mut out, Exec::Reference)?;
    Ok(out)
}

pub fn omega_scores_into(
    a: &DenseMatrix,
    h: &DenseMatrix,
    omega: &ObservationSet,
    out: &mut [f64],
    exec: Exec,
) -> Result<()> {
    check_omega_factors("omega_scores", a.rows(), a.cols(), h, omega)?;
    if out.len() != omega.len() {
        return Err(Error::dims("omega_scores", omega.len(), out.len()));
    }
    let labels = omega.labels();
    let score_row = |i: usize, start: usize, out_row: &mut [f64]| {
        let a_row = a.row(i);
        for (q, o) in out_row.iter_mut().enumerate() {
            *o = dot(a_row, h.row(labels[start + q]));
        }
    };
    if exec.is_parallel() {
        split_by_rows(out, omega)
            .into_par_iter()
            .for_each(|(i, start, r)| score_row(i, start, r));
    } else {
        for (i, start, r) in split_by_rows(out, omega) {
            score_row(i, start, r);
        }
    }
    Ok(())
}

/// `D * H` where `D` is an n x L matrix supported on `omega`, with `d[p]` the
/// value at the `p`-th observed cell.
pub fn omega_scatter_mm(
    d: &[f64],
    h: &DenseMatrix,
    omega: &ObservationSet,
) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(omega.n_instances(), h.cols());
    omega_scatter_mm_into(d, h, omega, &mut out, Exec::Reference)?;
    Ok(out)
}

pub fn omega_scatter_mm_into(
    d: &[f64],
    h: &DenseMatrix,
    omega: &ObservationSet,
    out: &mut DenseMatrix,
    exec: Exec,
) -> Result<()> {
    if d.len() != omega.len() {
        return Err(Error::dims(
            "omega_scatter_mm",
            format!("{} values aligned with observations", omega.len()),
            d.len(),
        ));
    }
    check_omega_factors(
        "omega_scatter_mm",
        out.rows(),
        out.cols(),
        h,
        omega,
    )?;
    let k = h.cols();
    if k == 0 {
        return Ok(());
    }
    let labels = omega.labels();
    let row_kernel = |i: usize, out_row: &mut [f64]| {
        out_row.fill(0.0);
        for p in omega.row_range(i) {
            axpy(d[p], h.row(labels[p]), out_row);
        }
    };
    let buf = out.as_mut_slice();
    if exec.is_parallel() {
        buf.par_chunks_mut(k)
            .enumerate()
            .for_each(|(i, r)| row_kernel(i, r));
    } else {
        buf.chunks_mut(k).enumerate().for_each(|(i, r)| row_kernel(i, r));
    }
    Ok(())
}

fn check_omega_factors(
    op: &'static str,
    a_rows: usize,
    a_cols: usize,
    h: &DenseMatrix,
    omega: &ObservationSet,
) -> Result<()> {
    if a_cols != h.cols() {
        return Err(Error::dims(op, format!("rank {a_cols}"), h.cols()));
    }
    if omega.n_instances() > a_rows {
        return Err(Error::IndexOutOfBounds {
            row: omega.n_instances() - 1,
            col: 0,
            rows: a_rows,
            cols: h.rows(),
        });
    }
    if omega.n_labels() > h.rows() {
        return Err(Error::IndexOutOfBounds {
            row: 0,
            col: omega.n_labels() - 1,
            rows: a_rows,
            cols: h.rows(),
        });
    }
    if omega.n_instances() != a_rows {
        return Err(Error::dims(
            op,
            format!("{} instances", omega.n_instances()),
            a_rows,
        ));
    }
    Ok(())
}

/// Splits an observation-aligned buffer into per-instance slices.
fn split_by_rows<'a>(
    buf: &'a mut [f64],
    omega: &ObservationSet,
) -> Vec<(usize, usize, &'a mut [f64])> {
    let mut parts = Vec::with_capacity(omega.n_instances());
    let mut rest = buf;
    for i in 0..omega.n_instances() {
        let range = omega.row_range(i);
        let (head, tail) = rest.split_at_mut(range.len());
        parts.push((i, range.start, head));
        rest = tail;
    }
    parts
}
