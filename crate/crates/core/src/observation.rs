//! The set of observed (instance, label) cells.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::SparseRowMatrix;

/// Observed cells of an `n x L` label grid together with their 0/1 values.
///
/// Entries are kept in row-major order `(i, j)` ascending; that order is the
/// one every per-entry buffer (scores, `D`, `U`) is aligned with. A second,
/// column-grouped view indexes the same entries by label.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    n: usize,
    labels: usize,
    inst: Vec<usize>,
    label: Vec<usize>,
    values: Vec<f64>,
    row_ptr: Vec<usize>,
    col_ptr: Vec<usize>,
    col_perm: Vec<usize>,
}

impl ObservationSet {
    /// Builds the set from `(i, j, y)` triples in any order.
    ///
    /// Rejects out-of-range indices, duplicate cells and values other than 0 or 1.
    pub fn new(n: usize, labels: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, y) in &entries {
            if i >= n || j >= labels {
                return Err(Error::IndexOutOfBounds {
                    row: i,
                    col: j,
                    rows: n,
                    cols: labels,
                });
            }
            if y != 0.0 && y != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "observed label at ({i}, {j}) is {y}, expected 0 or 1"
                )));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::DuplicateEntry {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }
        let mut inst = Vec::with_capacity(entries.len());
        let mut label = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, j, y) in entries {
            inst.push(i);
            label.push(j);
            values.push(y);
        }
        Ok(Self::from_sorted(n, labels, inst, label, values))
    }

    /// Every cell of the grid observed, with values read from `y` (absent = 0).
    pub fn full_grid(y: &SparseRowMatrix) -> Self {
        let (n, labels) = (y.rows(), y.cols());
        let mut inst = Vec::with_capacity(n * labels);
        let mut label = Vec::with_capacity(n * labels);
        let mut values = vec![0.0; n * labels];
        for i in 0..n {
            for j in 0..labels {
                inst.push(i);
                label.push(j);
            }
            let (idx, vals) = y.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                values[i * labels + j] = v;
            }
        }
        Self::from_sorted(n, labels, inst, label, values)
    }

    fn from_sorted(
        n: usize,
        labels: usize,
        inst: Vec<usize>,
        label: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_ptr = vec![0usize; labels + 1];
        for (&i, &j) in inst.iter().zip(&label) {
            row_ptr[i + 1] += 1;
            col_ptr[j + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..labels {
            col_ptr[j + 1] += col_ptr[j];
        }
        // Stable counting sort keeps instances ascending within each label.
        let mut next = col_ptr.clone();
        let mut col_perm = vec![0usize; label.len()];
        for (p, &j) in label.iter().enumerate() {
            col_perm[next[j]] = p;
            next[j] += 1;
        }
        Self {
            n,
            labels,
            inst,
            label,
            values,
            row_ptr,
            col_ptr,
            col_perm,
        }
    }

    /// Number of instances `n` (grid rows).
    pub fn n_instances(&self) -> usize {
        self.n
    }

    /// Number of labels `L` (grid columns).
    pub fn n_labels(&self) -> usize {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every cell of the grid is observed.
    pub fn is_full(&self) -> bool {
        self.len() == self.n * self.labels
    }

    #[inline]
    pub fn instance(&self, p: usize) -> usize {
        self.inst[p]
    }

    #[inline]
    pub fn label(&self, p: usize) -> usize {
        self.label[p]
    }

    #[inline]
    pub fn value(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn instances(&self) -> &[usize] {
        &self.inst
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(i, j, y)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).map(move |p| (self.inst[p], self.label[p], self.values[p]))
    }

    /// Entry positions belonging to instance `i`; contiguous in canonical order.
    #[inline]
    pub fn row_range(&self, i: usize) -> Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Entry positions belonging to label `j`, ascending by instance.
    #[inline]
    pub fn col_entries(&self, j: usize) -> &[usize] {
        &self.col_perm[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Number of observed instances per label.
    pub fn label_counts(&self) -> Vec<usize> {
        self.col_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_views() {
        let omega =
            ObservationSet::new(3, 2, vec![(2, 0, 1.0), (0, 1, 0.0), (0, 0, 1.0), (1, 1, 1.0)])
                .unwrap();
        let triples: Vec<_> = omega.iter().collect();
        assert_eq!(
            triples,
            vec![(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0), (2, 0, 1.0)]
        );
        assert_eq!(omega.row_range(0), 0..2);
        assert_eq!(omega.row_range(2), 3..4);
        assert_eq!(omega.col_entries(0), &[0, 3]);
        assert_eq!(omega.col_entries(1), &[1, 2]);
        assert_eq!(omega.label_counts(), vec![2, 2]);
    }

    #[test]
    fn rejects_invalid_entries() {
        assert!(matches!(
            ObservationSet::new(2, 2, vec![(0, 0, 1.0), (0, 0, 0.0)]),
            Err(Error::DuplicateEntry { row: 0, col: 0 })
        ));
        assert!(ObservationSet::new(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(ObservationSet::new(2, 2, vec![(0, 0, -1.0)]).is_err());
    }

    #[test]
    fn full_grid_densifies() {
        let y = SparseRowMatrix::from_triplets(2, 3, vec![(0, 2, 1.0), (1, 0, 1.0)]).unwrap();
        let omega = ObservationSet::full_grid(&y);
        assert!(omega.is_full());
        assert_eq!(omega.values(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(omega.col_entries(2), &[2, 5]);
    }

    #[test]
    fn row_and_column_views_cover_same_entries() {
        let mut dedup: Vec<(usize, usize, f64)> = (0..40)
            .map(|p| ((p * 7) % 11, (p * 5) % 13, (p % 2) as f64))
            .collect();
        dedup.sort_by_key(|&(i, j, _)| (i, j));
        dedup.dedup_by_key(|e| (e.0, e.1));
        let omega = ObservationSet::new(11, 13, dedup).unwrap();
        let mut by_col: Vec<usize> = (0..13).flat_map(|j| omega.col_entries(j).to_vec()).collect();
        by_col.sort_unstable();
        let by_row: Vec<usize> = (0..11).flat_map(|i| omega.row_range(i)).collect();
        assert_eq!(by_col, by_row);
    }
}
