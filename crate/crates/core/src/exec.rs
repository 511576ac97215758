//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! Every function here has the same contract: the output is identical,
//! bit for bit, whether the `parallel` feature is enabled or not and
//! whatever the rayon pool size is. This is achieved by only ever
//! parallelizing over independent slots (ordered `collect`, disjoint
//! `chunks_mut`) and keeping all reductions sequential and fixed-order.
//!
//! The `*_seq` variants are always sequential; they exist so benchmarks
//! can compare both code paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over indices `0..n`, collecting results in order.
pub fn map_indexed<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`].
pub fn map_indexed_seq<U>(n: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Process disjoint equal-sized chunks of a mutable slice.
///
/// `f(chunk_index, chunk)` must only write through `chunk`.
pub fn for_each_chunk_mut<T: Send>(
    data: &mut [T],
    chunk_len: usize,
    f: impl Fn(usize, &mut [T]) + Sync,
) {
    assert!(chunk_len > 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Sequential twin of [`for_each_chunk_mut`].
pub fn for_each_chunk_mut_seq<T>(
    data: &mut [T],
    chunk_len: usize,
    f: impl Fn(usize, &mut [T]),
) {
    assert!(chunk_len > 0);
    data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
}

/// Fill a pre-sized output slice, one slot per index.
pub fn fill_slots<T: Send>(out: &mut [T], f: impl Fn(usize) -> T + Sync) {
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_maps_agree() {
        let f = |i: usize| (i as f64).sin() * (i as f64 + 1.0).ln();
        let a = map_indexed(1000, f);
        let b = map_indexed_seq(1000, f);
        assert_eq!(a, b);
    }

    #[test]
    fn chunk_processing_covers_all_slots() {
        let mut data = vec![0usize; 64];
        for_each_chunk_mut(&mut data, 8, |i, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = i * 8 + j;
            }
        });
        assert!(data.iter().enumerate().all(|(i, &x)| x == i));
    }
}
