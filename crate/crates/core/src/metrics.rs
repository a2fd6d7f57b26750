//! Multi-label evaluation: top-K accuracy, Hamming loss and per-instance AUC.
//!
//! Ground truth is a sparse `m x L` matrix whose stored non-zeros are the
//! positive labels.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseRowMatrix};

fn check_shapes(op: &'static str, scores: &DenseMatrix, y: &SparseRowMatrix) -> Result<()> {
    if scores.shape() != (y.rows(), y.cols()) {
        return Err(Error::dims(
            op,
            format!("{}x{} scores", y.rows(), y.cols()),
            format!("{}x{}", scores.rows(), scores.cols()),
        ));
    }
    Ok(())
}

fn positives(y: &SparseRowMatrix, i: usize) -> impl Iterator<Item = usize> + '_ {
    let (idx, vals) = y.row(i);
    idx.iter().zip(vals).filter(|(_, &v)| v != 0.0).map(|(&j, _)| j)
}

/// Indices of the `k` largest entries of `row`, best first; ties go to the
/// smaller label index.
pub fn top_k_labels(row: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    let better = |&p: &usize, &q: &usize| row[q].total_cmp(&row[p]).then(p.cmp(&q));
    let k = k.min(row.len());
    if k == 0 {
        return Vec::new();
    }
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, better);
        order.truncate(k);
    }
    order.sort_unstable_by(better);
    order
}

fn check_k(k: usize, labels: usize) -> Result<()> {
    if k == 0 || k > labels {
        return Err(Error::InvalidArgument(format!(
            "K must lie in 1..={labels}, got {k}"
        )));
    }
    Ok(())
}

/// Mean over instances of `|top_K(scores_i) ∩ positives_i| / K`.
pub fn top_k_accuracy(scores: &DenseMatrix, y: &SparseRowMatrix, k: usize) -> Result<f64> {
    check_shapes("top_k_accuracy", scores, y)?;
    check_k(k, y.cols())?;
    if y.rows() == 0 {
        return Ok(0.0);
    }
    let mut truth = vec![false; y.cols()];
    let mut total = 0.0;
    for i in 0..y.rows() {
        for j in positives(y, i) {
            truth[j] = true;
        }
        let hits = top_k_labels(scores.row(i), k)
            .into_iter()
            .filter(|&j| truth[j])
            .count();
        total += hits as f64 / k as f64;
        for j in positives(y, i) {
            truth[j] = false;
        }
    }
    Ok(total / y.rows() as f64)
}

/// Fraction of cells where `score >= threshold` disagrees with the truth.
pub fn hamming_loss(scores: &DenseMatrix, y: &SparseRowMatrix, threshold: f64) -> Result<f64> {
    check_shapes("hamming_loss", scores, y)?;
    let cells = y.rows() * y.cols();
    if cells == 0 {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for i in 0..y.rows() {
        let row = scores.row(i);
        // start from all predicted positives, then settle each true positive
        let mut false_pos = row.iter().filter(|&&s| s >= threshold).count();
        for j in positives(y, i) {
            if row[j] >= threshold {
                false_pos -= 1;
            } else {
                wrong += 1;
            }
        }
        wrong += false_pos;
    }
    Ok(wrong as f64 / cells as f64)
}

/// AUC of one instance's label scores, `None` without both classes.
///
/// Mann-Whitney statistic with mid-ranks, so a tied (positive, negative)
/// pair counts one half.
pub fn instance_auc(row: &[f64], is_pos: &[bool]) -> Option<f64> {
    let n_pos = is_pos.iter().filter(|&&p| p).count();
    let n_neg = row.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_unstable_by(|&p, &q| row[p].total_cmp(&row[q]));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // 1-based mid-rank of the tie block [start, end)
        let mid = (start + end + 1) as f64 / 2.0;
        let block_pos = order[start..end].iter().filter(|&&j| is_pos[j]).count();
        pos_rank_sum += mid * block_pos as f64;
        start = end;
    }
    let p = n_pos as f64;
    Some((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

/// Mean per-instance AUC over instances with at least one positive and one
/// negative label, plus the number of skipped instances.
pub fn average_auc(scores: &DenseMatrix, y: &SparseRowMatrix) -> Result<(f64, usize)> {
    check_shapes("average_auc", scores, y)?;
    let mut is_pos = vec![false; y.cols()];
    let mut sum = 0.0;
    let mut scored = 0usize;
    for i in 0..y.rows() {
        is_pos.fill(false);
        for j in positives(y, i) {
            is_pos[j] = true;
        }
        if let Some(auc) = instance_auc(scores.row(i), &is_pos) {
            sum += auc;
            scored += 1;
        }
    }
    let skipped = y.rows() - scored;
    if scored == 0 {
        return Ok((0.0, skipped));
    }
    Ok((sum / scored as f64, skipped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub top_k_accuracy: BTreeMap<usize, f64>,
    pub hamming_loss: f64,
    pub average_auc: f64,
    pub instances_skipped_for_auc: usize,
}

/// All three criteria at once.
pub fn evaluate(
    scores: &DenseMatrix,
    y: &SparseRowMatrix,
    ks: &[usize],
    threshold: f64,
) -> Result<EvalReport> {
    let mut top = BTreeMap::new();
    for &k in ks {
        top.insert(k, top_k_accuracy(scores, y, k)?);
    }
    let (auc, skipped) = average_auc(scores, y)?;
    Ok(EvalReport {
        top_k_accuracy: top,
        hamming_loss: hamming_loss(scores, y, threshold)?,
        average_auc: auc,
        instances_skipped_for_auc: skipped,
    })
}
