//! Execution mode for the numerical kernels.

use rayon::ThreadPool;

use crate::error::{Error, Result};

/// How a kernel distributes its work.
///
/// `Reference` is single-threaded with a fixed reduction order, so identical
/// inputs give bit-identical outputs. `Parallel` partitions rows across the
/// current rayon pool; results agree with reference mode to rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Reference,
    Parallel,
}

impl Exec {
    /// `Parallel` when more than one thread is requested.
    pub fn for_threads(threads: usize) -> Self {
        if threads > 1 {
            Exec::Parallel
        } else {
            Exec::Reference
        }
    }

    pub fn is_parallel(self) -> bool {
        self == Exec::Parallel
    }
}

/// Builds a dedicated pool for `threads > 1`; `None` means reference mode.
pub fn thread_pool(threads: usize) -> Result<Option<ThreadPool>> {
    if threads <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} threads: {e}")))
}

/// Runs `f` inside the pool when one exists, on the caller's thread otherwise.
pub fn run_with<T: Send>(pool: Option<&ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
