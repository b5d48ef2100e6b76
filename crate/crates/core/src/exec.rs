//! Sequential / rayon execution switch.
//!
//! Every helper here gives the same bits whichever mode is used: element-wise
//! maps are independent, and reductions always sum fixed-size chunks in index
//! order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by reductions. Fixed so results do not depend on the
/// number of worker threads.
pub const REDUCE_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when compiled with the `parallel` feature; otherwise the
    /// same as `Sequential`.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Fill `out[i] = f(i)`.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i)),
            _ => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i)),
        }
    }

    /// Collect `f(i)` for `i in 0..n`.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Apply `f(chunk_index, chunk)` over consecutive mutable chunks.
    pub fn for_chunks_mut<F>(self, data: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(c, s)| f(c, s)),
            _ => data.chunks_mut(chunk).enumerate().for_each(|(c, s)| f(c, s)),
        }
    }

    /// `Σ f(i)` over `0..n`, chunked for a deterministic summation order.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = |c: usize| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        };
        let parts: Vec<f64> = match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if chunks > 1 => (0..chunks).into_par_iter().map(partial).collect(),
            _ => (0..chunks).map(partial).collect(),
        };
        parts.iter().sum()
    }

    pub fn dot(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.sum(a.len(), |i| a[i] * b[i])
    }

    pub fn norm_sq(self, a: &[f64]) -> f64 {
        self.sum(a.len(), |i| a[i] * a[i])
    }
}
