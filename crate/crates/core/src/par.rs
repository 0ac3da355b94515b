//! Thin switch between rayon and sequential iteration.
//!
//! Every caller partitions work into fixed chunks and combines results in
//! chunk order, so outputs never depend on the thread count.

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, F>(chunks: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..chunks).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, F>(chunks: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..chunks).map(f).collect()
}

/// Splits `[0, total)` into `chunk`-sized ranges.
pub(crate) fn chunk_range(total: u64, chunk: u64, idx: u64) -> std::ops::Range<u64> {
    let start = idx * chunk;
    start..(start + chunk).min(total)
}

pub(crate) fn chunk_count(total: u64, chunk: u64) -> u64 {
    total.div_ceil(chunk)
}
