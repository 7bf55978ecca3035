//! Execution strategy for the data-parallel loops in this crate.
//!
//! With the `parallel` feature (on by default) work is spread over a rayon
//! pool; without it every strategy degrades to a plain sequential loop.

/// How a data-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Parallel over the global rayon pool.
    Parallel,
    /// Parallel over a dedicated pool with at most this many workers.
    Bounded(usize),
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Bounded execution for a user-supplied worker count; `1` is sequential.
    pub fn with_limit(workers: usize) -> Self {
        match workers {
            0 | 1 => Execution::Sequential,
            n => Execution::Bounded(n),
        }
    }

    /// Maps `f` over `items`, preserving input order in the output.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Bounded(n) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(err) => {
                        log::warn!("thread pool unavailable ({err}); running sequentially");
                        items.iter().map(f).collect()
                    }
                }
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel | Execution::Bounded(_) => items.iter().map(f).collect(),
        }
    }
}
