//! Order-preserving data-parallel helpers.
//!
//! With the `parallel` feature these run on rayon; without it they fall back to
//! plain iterators. Results always come back in input order, and callers reduce
//! them sequentially, so outputs are bit-identical either way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    seq::map(items, f)
}

/// Maps `f` over `0..n`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    seq::map_range(n, f)
}

/// Sequential versions, always available (benchmarks compare against these).
pub mod seq {
    pub fn map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F: Fn(usize) -> R>(n: usize, f: F) -> Vec<R> {
        (0..n).map(f).collect()
    }
}

/// Bounds the worker count of the global pool. A no-op without `parallel`.
pub fn set_jobs(jobs: usize) -> crate::Result<()> {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| crate::Error::InvalidArgument(format!("thread pool: {e}")))?;
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(())
}

/// Draws `count` independent child seeds from `rng`, so per-item streams do
/// not depend on how work is scheduled.
pub fn child_seeds<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u64> {
    (0..count).map(|_| rng.gen()).collect()
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
