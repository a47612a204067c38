use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use floquet_core::experiments::SweepExecutor;

use crate::error::CliError;

/// Sweep executor backed by a private rayon pool. Results come back in index
/// order whatever the thread count.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> Result<Self, CliError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads.max(1)).build().map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl SweepExecutor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
