//! Trial scheduling: rayon when the `parallel` feature is enabled, a plain loop
//! otherwise. Output order always follows the input index.

use crate::error::Result;

/// How trials are scheduled. Results are identical for every choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// `workers = None` uses rayon's global pool. Falls back to sequential
    /// execution when the crate is built without the `parallel` feature.
    #[default]
    Parallel,
    ParallelWith { workers: usize },
}

impl Execution {
    /// `0` means "all cores", `1` means sequential.
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            w => Execution::ParallelWith { workers: w },
        }
    }
}

pub(crate) fn map_indices<T, F>(range: std::ops::Range<usize>, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        Execution::Sequential => range.map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::ParallelWith { workers } => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| crate::error::Error::invalid("workers", e.to_string()))?;
            pool.install(|| range.into_par_iter().map(f).collect())
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::ParallelWith { .. } => range.map(f).collect(),
    }
}
