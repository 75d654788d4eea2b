//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) work is spread over the rayon
//! pool; without it the same functions run sequentially. Reductions use
//! fixed block boundaries and a pairwise tree, so results are bit-identical
//! in both modes and independent of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const BLOCK: usize = 4096;

/// Evaluate `f` at `0..n`, preserving order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Apply `f(chunk_index, chunk)` to consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Apply `f(index, element)` to every element.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for_each_chunk_mut(data, BLOCK, |b, chunk| {
        let base = b * BLOCK;
        for (i, v) in chunk.iter_mut().enumerate() {
            f(base + i, v);
        }
    });
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partial = map_range(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        let local: Vec<f64> = (lo..hi).map(&f).collect();
        pairwise(&local)
    });
    pairwise(&partial)
}

/// Maximum of `f(i)` over `0..n`; `-inf` when empty. NaN propagates.
pub fn max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partial = map_range(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        (lo..hi).map(&f).fold(f64::NEG_INFINITY, nan_max)
    });
    partial.into_iter().fold(f64::NEG_INFINITY, nan_max)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_pairwise() {
        let n = 3 * BLOCK + 17;
        let s = sum(n, |i| 1.0 / (1.0 + i as f64));
        let direct: f64 = (0..n).map(|i| 1.0 / (1.0 + i as f64)).sum();
        assert!((s - direct).abs() < 1e-12 * direct);
        assert_eq!(s.to_bits(), sum(n, |i| 1.0 / (1.0 + i as f64)).to_bits());
    }

    #[test]
    fn max_of_empty_is_neg_inf() {
        assert_eq!(max(0, |_| 1.0), f64::NEG_INFINITY);
        assert_eq!(max(10, |i| i as f64), 9.0);
        assert!(max(10, |i| if i == 3 { f64::NAN } else { 0.0 }).is_nan());
    }

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(10_000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
