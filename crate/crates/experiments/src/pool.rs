use rayon::prelude::*;

use crate::error::{ExpError, Result};

/// Maps `f` over `items` on `workers` threads; output order follows input
/// order regardless of scheduling.
pub fn run_parallel<T, R, F>(workers: usize, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    if workers == 0 {
        return Err(ExpError::config("workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExpError::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.into_par_iter().map(f).collect())
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
