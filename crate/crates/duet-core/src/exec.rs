//! Worker-pool plumbing. Searches shard their candidate space into an
//! ordered list of independent work items; `map_shards` evaluates them
//! (in parallel when the `parallel` feature is on) and returns results in
//! shard order, so every reduction downstream is order-deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `f` inside a pool of `workers` threads. With the `parallel`
/// feature disabled the worker count is ignored and `f` runs inline.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .expect("failed to build worker pool");
        pool.install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

/// Maps `f` over the shards, preserving shard order in the output.
pub fn map_shards<T, R, F>(shards: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        shards.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        shards.into_iter().map(f).collect()
    }
}

/// Splits the half-open counter range `[0, total)` into at most
/// `max_shards` contiguous chunks. Shard boundaries depend only on the
/// inputs, never on the worker count.
pub fn chunk_ranges(total: u64, max_shards: u64) -> Vec<(u64, u64)> {
    if total == 0 {
        return Vec::new();
    }
    let shards = max_shards.max(1).min(total);
    let base = total / shards;
    let extra = total % shards;
    let mut out = Vec::with_capacity(shards as usize);
    let mut lo = 0u64;
    for i in 0..shards {
        let len = base + u64::from(i < extra);
        out.push((lo, lo + len));
        lo += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        for total in [0u64, 1, 7, 64, 1000] {
            for shards in [1u64, 3, 16, 2000] {
                let chunks = chunk_ranges(total, shards);
                let mut expect = 0;
                for (lo, hi) in &chunks {
                    assert_eq!(*lo, expect);
                    assert!(hi > lo);
                    expect = *hi;
                }
                assert_eq!(expect, total);
            }
        }
    }

    #[test]
    fn map_shards_keeps_order() {
        let out = map_shards((0..100).collect(), |i: i32| i * 2);
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }
}
