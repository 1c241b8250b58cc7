//! Row-parallel execution with a sequential fallback.
//!
//! Every data-parallel loop in the crate goes through [`Exec`], so the same
//! code path runs on rayon when the `parallel` feature is enabled and on a
//! plain iterator otherwise. Results are always collected in row order, and
//! floating-point reductions are folded sequentially over those per-row
//! partials, so output is bit-identical whichever mode runs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a data-parallel loop is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    /// Uses the rayon global pool (or the pool installed by the caller).
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// True if this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Calls `f(row_index, row)` for every `row_len`-sized chunk of `data`.
    pub fn for_each_row<T, F>(self, data: &mut [T], row_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if row_len == 0 {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(j, row)| f(j, row)),
            _ => data
                .chunks_mut(row_len)
                .enumerate()
                .for_each(|(j, row)| f(j, row)),
        }
    }

    /// Sums per-row partials in row order (deterministic across modes).
    pub fn sum_rows<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map(n, f).into_iter().sum()
    }
}
