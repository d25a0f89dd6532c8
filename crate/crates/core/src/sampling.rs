//! Random test instances: functionals, kernels, chaos sums and processes.

use rand::seq::index;
use rand::Rng;

use crate::bernoulli::{Functional, OutcomeSpace, SimpleProcess};
use crate::kernel::{ChaosSum, SymmetricKernel};

/// Values drawn uniformly from `[-1, 1]`.
pub fn random_functional<R: Rng>(space: OutcomeSpace, rng: &mut R) -> Functional {
    let values = (0..space.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Functional::new(space, values).expect("finite values of the right length")
}

/// `u_k` drawn independently by [`random_functional`].
pub fn random_process<R: Rng>(space: OutcomeSpace, rng: &mut R) -> SimpleProcess {
    let rows = (0..space.m()).map(|_| random_functional(space, rng)).collect();
    SimpleProcess::new(space, rows).expect("one row per coordinate")
}

/// Kernel of the given order on indices `0..m` with `entries` distinct
/// nonzero values uniform in `[-1, 1]`, capped by the number of index sets.
pub fn random_kernel<R: Rng>(order: usize, m: usize, entries: usize, rng: &mut R) -> SymmetricKernel {
    let mut kernel = SymmetricKernel::zero(order);
    if order == 0 {
        return SymmetricKernel::constant(rng.random_range(-1.0..=1.0));
    }
    if order > m {
        return kernel;
    }
    for _ in 0..entries {
        let mut t: Vec<u32> = index::sample(rng, m, order)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        t.sort_unstable();
        let v: f64 = rng.random_range(-1.0..=1.0);
        kernel.insert_sorted(t, if v == 0.0 { 0.5 } else { v });
    }
    kernel
}

/// Centered chaos sum with orders `1..=max_order` on `m` coordinates, scaled
/// to unit variance.
pub fn random_chaos_sum<R: Rng>(m: usize, max_order: usize, entries: usize, rng: &mut R) -> ChaosSum {
    loop {
        let kernels: Vec<SymmetricKernel> = (1..=max_order.min(m))
            .map(|n| random_kernel(n, m, entries, rng))
            .collect();
        let sum = ChaosSum::new(0.0, kernels).expect("increasing orders");
        let var = sum.variance();
        if var > 0.0 {
            let scale = var.sqrt().recip();
            let kernels = sum.kernels().iter().map(|k| k.scale(scale)).collect();
            return ChaosSum::new(0.0, kernels).expect("increasing orders");
        }
    }
}
