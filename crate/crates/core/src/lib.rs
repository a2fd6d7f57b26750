//! Low-rank empirical risk minimization for multi-label learning with
//! missing labels.
//!
//! The predictor is `f(x) = Z^T x` with `Z = W H^T` of rank at most `k`,
//! fitted by alternating minimization over the factors. The expensive
//! W-update is solved with conjugate gradient (squared loss) or a
//! trust-region Newton method (logistic, L2-hinge), both driven by
//! gradient and Hessian-vector kernels that never materialize the
//! `|Omega| x dk` design matrix of the subproblem.

pub mod error;
pub mod closed_form;
pub mod exec;
pub mod io;
pub mod kernels;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod objective;
pub mod observation;
pub mod solver;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use exec::Exec;
pub use loss::LossKind;
pub use matrix::{DenseMatrix, SparseRowMatrix};
pub use observation::ObservationSet;
pub use train::{FactorModel, TrainConfig, TrainMode};
