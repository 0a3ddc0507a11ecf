//! Trial execution: a rayon pool when the `parallel` feature is on, a plain
//! loop otherwise. Both return results in input order.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[derive(Clone)]
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// A pool of `workers` threads. Without the `parallel` feature this is
    /// the sequential executor.
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        #[cfg(feature = "parallel")]
        {
            if workers > 1 {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    return Executor { workers, pool: Some(Arc::new(pool)) };
                }
            }
        }
        Executor::sequential()
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Maps `f` over `0..n` with one scratch state per worker, preserving
    /// index order in the output.
    pub fn map_indexed<S, T, I, F>(&self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .with_min_len(16)
                    .map_init(&init, |s, i| f(s, i))
                    .collect()
            });
        }
        let mut state = init();
        (0..n).map(|i| f(&mut state, i)).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Executor::sequential()
    }
}
