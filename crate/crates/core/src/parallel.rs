//! Index-ordered parallel map with a sequential fallback.

use serde::{Deserialize, Serialize};

/// How many threads evaluate samples. Results never depend on this.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workers {
    #[default]
    Sequential,
    /// A dedicated pool of `n` threads; `0` means one per core.
    Threads(usize),
}

impl Workers {
    pub fn from_count(n: usize) -> Self {
        if n == 1 {
            Workers::Sequential
        } else {
            Workers::Threads(n)
        }
    }
}

/// `(0..n).map(f)`, evaluated on the requested workers and gathered in index order.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match workers {
        Workers::Sequential | Workers::Threads(1) => (0..n).map(f).collect(),
        Workers::Threads(threads) => parallel_map(n, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running sequentially");
            (0..n).map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
