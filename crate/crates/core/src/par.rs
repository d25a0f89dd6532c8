//! Execution strategy for the data-parallel loops.
//!
//! Every reduction here is blocked: each fixed-size block is summed in index
//! order and the block partials are folded in block order. The parallel and
//! sequential paths therefore return bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of terms summed sequentially inside one reduction block.
pub const BLOCK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Sets the size of the global worker pool. Fails if the pool was already
/// initialised. A no-op without the `parallel` feature.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

pub fn available_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

pub(crate) fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

fn block_partial<F: Fn(usize) -> f64>(block: usize, n: usize, f: &F) -> f64 {
    let start = block * BLOCK;
    let end = (start + BLOCK).min(n);
    let mut acc = 0.0;
    for i in start..end {
        acc += f(i);
    }
    acc
}

/// Deterministic blocked sum of `f(0) + ... + f(n - 1)`.
pub(crate) fn block_sum<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partials = map_range(exec, blocks, |b| block_partial(b, n, &f));
    partials.into_iter().fold(0.0, |acc, x| acc + x)
}

/// Applies `f` to consecutive chunks of `data` of length `chunk`.
pub(crate) fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && data.len() / chunk > 1 {
        data.par_chunks_mut(chunk).for_each(f);
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk).for_each(f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_sum_is_bit_identical_across_strategies() {
        let n = 3 * BLOCK + 17;
        let f = |i: usize| ((i as f64) * 0.1).sin() / (1.0 + i as f64);
        let a = block_sum(Execution::Sequential, n, f);
        let b = block_sum(Execution::Parallel, n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(Execution::Parallel, 1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
