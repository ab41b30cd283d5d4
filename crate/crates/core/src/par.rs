//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the maps run on the rayon pool. Every helper
//! preserves input order, and [`map_reduce_chunks`] folds fixed-size chunks
//! then combines the chunk results left to right, so floating-point sums are
//! bitwise identical for any thread count, including the sequential build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Order-preserving map over an index range.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Folds each `chunk`-sized block of `items` sequentially with `fold`, then
/// combines the per-chunk accumulators in chunk order with `combine`.
///
/// Returns `None` for an empty input.
pub fn map_reduce_chunks<T, A, I, F, C>(
    items: &[T],
    chunk: usize,
    init: I,
    fold: F,
    combine: C,
) -> Option<A>
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &T) + Sync + Send,
    C: Fn(&mut A, A),
{
    let chunk = chunk.max(1);
    let fold_chunk = |block: &[T]| {
        let mut acc = init();
        for item in block {
            fold(&mut acc, item);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<A> = items.par_chunks(chunk).map(fold_chunk).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = items.chunks(chunk).map(fold_chunk).collect();

    let mut iter = partials.into_iter();
    let mut acc = iter.next()?;
    for part in iter {
        combine(&mut acc, part);
    }
    Some(acc)
}

/// Sizes the global rayon pool. A no-op in the sequential build or when the
/// pool was already initialised.
pub fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<u32> = (0..1000).collect();
        let out = map(&v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, &y)| y == 2 * i as u32));
    }

    #[test]
    fn chunked_reduce_is_order_stable() {
        let v: Vec<f64> = (0..10_000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let a = map_reduce_chunks(&v, 64, || 0.0, |s, x| *s += x, |s, o| *s += o).unwrap();
        let mut b = 0.0;
        for block in v.chunks(64) {
            let mut s = 0.0;
            for x in block {
                s += x;
            }
            b += s;
        }
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(map_reduce_chunks::<f64, f64, _, _, _>(&[], 4, || 0.0, |_, _| {}, |_, _| {}).is_none());
    }
}
