//! Inner solvers driven only through gradient and Hessian-vector callbacks.

mod cg;
mod tron;

pub use cg::cg_solve;
pub use tron::{tron_minimize, tron_minimize_with, TronOptions};

/// A smooth convex function known through its value, gradient and
/// (generalized) Hessian-vector products.
pub trait TwiceDifferentiable {
    fn dim(&self) -> usize;

    fn value(&mut self, w: &[f64]) -> f64;

    fn gradient(&mut self, w: &[f64], out: &mut [f64]);

    /// Hessian at `w` applied to `s`.
    fn hess_vec(&mut self, w: &[f64], s: &[f64], out: &mut [f64]);
}

/// Adapter turning three closures into a [`TwiceDifferentiable`].
pub struct FnProblem<V, G, H> {
    dim: usize,
    value: V,
    grad: G,
    hv: H,
}

impl<V, G, H> FnProblem<V, G, H>
where
    V: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], &mut [f64]),
    H: FnMut(&[f64], &[f64], &mut [f64]),
{
    pub fn new(dim: usize, value: V, grad: G, hv: H) -> Self {
        Self {
            dim,
            value,
            grad,
            hv,
        }
    }
}

impl<V, G, H> TwiceDifferentiable for FnProblem<V, G, H>
where
    V: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], &mut [f64]),
    H: FnMut(&[f64], &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&mut self, w: &[f64]) -> f64 {
        (self.value)(w)
    }

    fn gradient(&mut self, w: &[f64], out: &mut [f64]) {
        (self.grad)(w, out)
    }

    fn hess_vec(&mut self, w: &[f64], s: &[f64], out: &mut [f64]) {
        (self.hv)(w, s, out)
    }
}

/// Outcome of an inner solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Residual norm for CG, gradient norm for TRON.
    pub final_residual_norm: f64,
    /// Absolute threshold the residual was tested against.
    pub tolerance: f64,
    pub converged: bool,
    pub objective_evals: usize,
    pub hv_evals: usize,
    /// CG met a direction with non-positive curvature.
    pub breakdown: bool,
}
