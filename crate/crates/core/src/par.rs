//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the crate was built with the rayon backend.
pub const ENABLED: bool = cfg!(feature = "parallel");

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// Runs `f` on every `(item, slot)` pair, where slots are disjoint mutable
/// pieces of one output buffer.
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, S, F>(items: &[T], slots: Vec<&mut [S]>, f: F)
where
    T: Sync,
    S: Send,
    F: Fn(&T, &mut [S]) + Sync + Send,
{
    items
        .par_iter()
        .zip(slots.into_par_iter())
        .for_each(|(item, slot)| f(item, slot));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, S, F>(items: &[T], slots: Vec<&mut [S]>, f: F)
where
    F: Fn(&T, &mut [S]),
{
    items
        .iter()
        .zip(slots)
        .for_each(|(item, slot)| f(item, slot));
}

#[cfg(feature = "parallel")]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA,
    B: FnOnce() -> RB,
{
    (a(), b())
}

/// Splits `buf` into consecutive pieces with the given lengths.
pub fn split_lengths<'a, S>(mut buf: &'a mut [S], lengths: &[usize]) -> Vec<&'a mut [S]> {
    let mut out = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let (head, tail) = std::mem::take(&mut buf).split_at_mut(len);
        out.push(head);
        buf = tail;
    }
    out
}
