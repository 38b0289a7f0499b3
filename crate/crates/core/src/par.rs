//! Data-parallel helpers with a sequential fallback.
//!
//! Everything routed through here is deterministic regardless of worker
//! count: callers pre-split their random streams per item, so the parallel
//! and sequential paths produce identical results. Compiling without the
//! `parallel` feature removes the rayon dependency entirely and every call
//! degrades to a plain sequential loop.

/// Worker-count policy for batch operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workers {
    /// Plain sequential loop on the calling thread.
    Sequential,
    /// Rayon pool with the default thread count (number of cores).
    Auto,
    /// Rayon pool with exactly this many threads.
    Fixed(usize),
}

impl Workers {
    /// Maps a config integer to a policy: 0 = auto, 1 = sequential, n = fixed.
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => Workers::Auto,
            1 => Workers::Sequential,
            n => Workers::Fixed(n),
        }
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::Auto
    }
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T, U, F>(items: &[T], workers: Workers, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match workers {
        Workers::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        Workers::Auto => items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        Workers::Fixed(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("failed to build worker pool");
            pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, U, F>(items: &[T], _workers: Workers, f: F) -> Vec<U>
where
    F: Fn(usize, &T) -> U,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Maps `f` over `0..n`, in parallel when the feature is enabled and the
/// ambient rayon pool has workers to spare. Used for inner loops (per-tree
/// training, per-slot offspring) that inherit the caller's pool.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
