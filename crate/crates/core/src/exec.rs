//! Execution policy for the data-parallel loops (per-t curve evaluation,
//! Monte Carlo trials).
//!
//! Every parallel map collects into an index-ordered `Vec`; reductions over
//! the collected values always run sequentially in ascending index order, so
//! results do not depend on the worker count or on whether the `parallel`
//! feature is compiled in.

/// How to run the independent per-item work of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Single-threaded loop.
    Sequential,
    /// Rayon work-stealing over the current thread pool. Without the
    /// `parallel` feature this degrades to [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this policy really runs on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fallible variant of [`Execution::map`]. The reported error is the one
    /// with the lowest index, independent of scheduling.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}
