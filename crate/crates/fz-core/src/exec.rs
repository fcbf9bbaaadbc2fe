//! Map-over-indices executor shared by the hot loops.
//!
//! Every expensive operation in this crate is a map over independent outputs
//! (coefficient indices, grid points, kernel pairs). `map` runs it on the
//! rayon pool when the `parallel` feature is enabled, `map_seq` always runs
//! the plain sequential loop. Per-output work is identical either way, so the
//! two produce bitwise-equal results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Parallel map over `0..n` when the `parallel` feature is on, sequential otherwise.
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential map over `0..n` regardless of feature flags.
pub(crate) fn map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Dispatches between [`map`] and [`map_seq`] at runtime.
pub(crate) fn map_if<T, F>(parallel: bool, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        map(n, f)
    } else {
        map_seq(n, f)
    }
}
