//! Execution policy for data-parallel loops.
//!
//! Every parallel loop in the crate collects its results in input order, so
//! `Sequential` and `Parallel` produce bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest per-task slice for cheap elementwise updates.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Requires crate feature `parallel`; falls back to `Sequential` otherwise.
    Parallel,
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
    /// True when loops actually fan out: `Parallel`, the feature enabled,
    /// and more than one worker thread.
    pub fn is_parallel(self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self == Execution::Parallel && rayon::current_num_threads() > 1
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over `items`, returning results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Applies `f` to each element of `items` in place.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            items.par_chunks_mut(MIN_CHUNK).enumerate().for_each(|(c, chunk)| {
                let offset = c * MIN_CHUNK;
                chunk.iter_mut().enumerate().for_each(|(j, x)| f(offset + j, x));
            });
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}
