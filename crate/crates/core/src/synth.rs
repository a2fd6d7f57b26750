//! Random instance generators for tests, benchmarks and demos.

use rand::seq::index;
use rand::Rng;

use crate::matrix::{DenseMatrix, SparseRowMatrix};
use crate::observation::ObservationSet;

/// Sparse `rows x cols` matrix; each cell is stored with probability
/// `density`, values uniform in `[-1, 1)` excluding zero.
pub fn random_sparse<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> SparseRowMatrix {
    let mut triplets = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen::<f64>() < density {
                let mut v = rng.gen_range(-1.0..1.0);
                if v == 0.0 {
                    v = 0.5;
                }
                triplets.push((i, j, v));
            }
        }
    }
    SparseRowMatrix::from_triplets(rows, cols, triplets).expect("generated triplets are valid")
}

/// Dense matrix with entries uniform in `[-1, 1)`.
pub fn random_dense<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Binary `rows x cols` label matrix with each cell positive with probability `density`.
pub fn random_labels<R: Rng>(rng: &mut R, rows: usize, cols: usize, density: f64) -> SparseRowMatrix {
    let mut triplets = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen::<f64>() < density {
                triplets.push((i, j, 1.0));
            }
        }
    }
    SparseRowMatrix::from_triplets(rows, cols, triplets).expect("generated triplets are valid")
}

/// `count` distinct cells drawn uniformly from the `n x labels` grid with
/// fair-coin 0/1 values.
pub fn random_observations<R: Rng>(
    rng: &mut R,
    n: usize,
    labels: usize,
    count: usize,
) -> ObservationSet {
    let count = count.min(n * labels);
    let entries = index::sample(rng, n * labels, count)
        .into_iter()
        .map(|c| (c / labels, c % labels, if rng.gen::<bool>() { 1.0 } else { 0.0 }))
        .collect();
    ObservationSet::new(n, labels, entries).expect("sampled cells are distinct")
}

/// Features and binary labels with a planted low-rank score structure.
#[derive(Debug, Clone)]
pub struct PlantedProblem {
    pub x: SparseRowMatrix,
    pub y: SparseRowMatrix,
}

/// Draws `n` instances whose label scores are `x^T W* H*^T` for hidden
/// factors of rank `rank`; each instance's top `positives` labels are set.
///
/// Features are sparse Gaussian-like with the given density. The same
/// `(w_star, h_star)` pair can be reused to draw train and test splits.
pub fn planted_low_rank<R: Rng>(
    rng: &mut R,
    n: usize,
    w_star: &DenseMatrix,
    h_star: &DenseMatrix,
    feature_density: f64,
    positives: usize,
) -> PlantedProblem {
    let d = w_star.rows();
    let labels = h_star.rows();
    let x = random_sparse(rng, n, d, feature_density);
    let a = crate::kernels::dense_spmm(&x, w_star).expect("shapes agree");
    let scores = a.matmul_transposed(h_star).expect("shapes agree");
    let mut triplets = Vec::with_capacity(n * positives);
    for i in 0..n {
        let mut order: Vec<usize> = (0..labels).collect();
        let row = scores.row(i);
        order.sort_by(|&p, &q| row[q].total_cmp(&row[p]).then(p.cmp(&q)));
        for &j in order.iter().take(positives) {
            triplets.push((i, j, 1.0));
        }
    }
    let y = SparseRowMatrix::from_triplets(n, labels, triplets).expect("valid labels");
    PlantedProblem { x, y }
}
