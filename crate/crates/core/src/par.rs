//! Parallel helpers with deterministic results.
//!
//! Per-path work is embarrassingly parallel; mapping over path indices and
//! collecting in index order yields output independent of the thread count.
//! Reductions go through [`crate::stats::pairwise_sum`], whose tree shape is
//! fixed by the data length alone.
//!
//! On wasm32 the same entry points run sequentially.

#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Splits a pairwise reduction into two joined halves when the slice is large
/// enough to amortize the fork. Both arms compute the same fixed tree, so the
/// result is bitwise identical to the sequential evaluation.
#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA,
    B: FnOnce() -> RB,
{
    (a(), b())
}
