//! Order-preserving maps over independent work items.
//!
//! With the `parallel` feature (default) [`par_map`] runs on the rayon
//! thread pool; without it, it falls back to [`seq_map`]. Each item is
//! processed by exactly one closure call, so per-item results do not
//! depend on the execution mode.

/// Applies `f` to every item, in parallel when the `parallel` feature is on.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_map(items, f)
    }
}

/// Applies `f` to every item on the calling thread.
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Whether [`par_map`] uses the thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
