//! Shared plumbing for data-parallel enumeration.
//!
//! Every heavy loop in this crate walks a flat index range `[0, total)` and
//! merges partial results with an associative, commutative operation (or a
//! leftmost-match rule), so the outcome is identical whether the range is
//! processed sequentially or split across threads. Chunk sizes depend only
//! on the range, never on the worker count.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest chunk worth handing to a worker.
const MIN_CHUNK: u64 = 1 << 12;
/// Upper bound on chunks per task, to keep scheduling overhead flat.
const MAX_CHUNKS: u64 = 1 << 10;

fn chunk_size(total: u64) -> u64 {
    total.div_ceil(MAX_CHUNKS).max(MIN_CHUNK)
}

fn ranges_with_step(total: u64, step: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    (0..total.div_ceil(step)).map(move |i| {
        let lo = i * step;
        lo..(lo + step).min(total)
    })
}

fn chunk_ranges(total: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    ranges_with_step(total, chunk_size(total))
}

/// Run `f` on a dedicated thread pool with `jobs` worker threads.
///
/// With `jobs = None`, or when the `parallel` feature is disabled, `f` runs
/// in the ambient execution context.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match jobs {
            Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("failed to build worker pool")
                .install(f),
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

/// Map disjoint chunks of `[0, total)` and fold the partial results.
///
/// `merge` must be associative and commutative with `identity` as neutral
/// element; this is what makes the result independent of scheduling.
pub(crate) fn map_reduce<A, M, I, R>(total: u64, map: M, identity: I, merge: R) -> A
where
    A: Send,
    M: Fn(Range<u64>) -> A + Sync + Send,
    I: Fn() -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    if total == 0 {
        return identity();
    }
    #[cfg(feature = "parallel")]
    {
        chunk_ranges(total)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(map)
            .reduce(&identity, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_reduce_seq(total, map, identity, merge)
    }
}

/// Sequential reference path for [`map_reduce`]; also the fallback body when
/// the `parallel` feature is off.
#[cfg_attr(feature = "parallel", allow(dead_code))]
pub(crate) fn map_reduce_seq<A, M, I, R>(total: u64, map: M, identity: I, merge: R) -> A
where
    M: Fn(Range<u64>) -> A,
    I: Fn() -> A,
    R: Fn(A, A) -> A,
{
    chunk_ranges(total).map(map).fold(identity(), merge)
}

/// [`map_reduce`] with a caller-chosen minimum chunk size, for kernels whose
/// per-chunk state (e.g. a histogram) is expensive relative to small chunks.
pub(crate) fn map_reduce_min_chunk<A, M, I, R>(
    total: u64,
    min_chunk: u64,
    sequential: bool,
    map: M,
    identity: I,
    merge: R,
) -> A
where
    A: Send,
    M: Fn(Range<u64>) -> A + Sync + Send,
    I: Fn() -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    if total == 0 {
        return identity();
    }
    let step = chunk_size(total).max(min_chunk.max(1));
    if sequential {
        return ranges_with_step(total, step)
            .map(map)
            .fold(identity(), merge);
    }
    #[cfg(feature = "parallel")]
    {
        ranges_with_step(total, step)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(map)
            .reduce(&identity, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges_with_step(total, step)
            .map(map)
            .fold(identity(), merge)
    }
}

/// Return the leftmost `Some` produced by scanning chunks of `[0, total)`.
///
/// `search` must report the match with the smallest index inside its chunk;
/// chunks are examined in order, so the global result is the overall
/// leftmost match regardless of the worker count. Workers past a found
/// match are cancelled early.
pub(crate) fn find_first<T, S>(total: u64, search: S) -> Option<T>
where
    T: Send,
    S: Fn(Range<u64>) -> Option<T> + Sync + Send,
{
    if total == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        chunk_ranges(total)
            .collect::<Vec<_>>()
            .into_par_iter()
            .find_map_first(search)
    }
    #[cfg(not(feature = "parallel"))]
    {
        find_first_seq(total, search)
    }
}

/// Sequential reference path for [`find_first`].
#[cfg_attr(feature = "parallel", allow(dead_code))]
pub(crate) fn find_first_seq<T, S>(total: u64, search: S) -> Option<T>
where
    S: Fn(Range<u64>) -> Option<T>,
{
    chunk_ranges(total).find_map(search)
}
