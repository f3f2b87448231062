//! Replica scheduling on a bounded rayon pool.
//!
//! Replica `i` of a run draws from substream `(tag << 40) | i` of the run
//! seed, and results are collected in replica order, so the output does not
//! depend on the number of workers.

use mosaic_core::rng::{substream, StreamRng};
use rayon::prelude::*;

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "MOSAIC_LAB_THREADS";

/// Workers to use: `MOSAIC_LAB_THREADS` if set to a positive integer,
/// otherwise the available parallelism.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => available,
    }
}

/// Runs `f(i, rng_i)` for `i < n` with `rng_i` the replica substream and
/// returns the results in replica order.
pub fn map_replicas<T, F>(seed: u64, tag: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync + Send,
{
    let job = || {
        (0..n)
            .into_par_iter()
            .map(|i| f(i, &mut substream(seed, (tag << 40) | i as u64)))
            .collect::<Vec<T>>()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}
