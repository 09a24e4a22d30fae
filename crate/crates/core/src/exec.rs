//! Execution policy for the per-item loops (scenes, instances, rows).
//!
//! Every parallel path collects results in input order, so outputs never
//! depend on the policy or on the size of the surrounding thread pool.
//! Without the `parallel` feature, [`Exec::Parallel`] runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Exec::Parallel => items.iter().map(f).collect(),
        }
    }

    /// Maps over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Exec::Parallel => (0..n).map(f).collect(),
        }
    }

    /// Map then fold with an associative, commutative `combine`.
    pub fn map_reduce<T, R, F, C>(self, items: &[T], identity: R, f: F, combine: C) -> R
    where
        T: Sync,
        R: Send + Sync + Clone,
        F: Fn(&T) -> R + Sync + Send,
        C: Fn(R, R) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).fold(identity, combine),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items
                .par_iter()
                .map(f)
                .reduce(|| identity.clone(), &combine),
            #[cfg(not(feature = "parallel"))]
            Exec::Parallel => items.iter().map(f).fold(identity, combine),
        }
    }
}
