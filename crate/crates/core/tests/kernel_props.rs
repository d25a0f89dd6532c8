use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chaos_stein::bernoulli::OutcomeSpace;
use chaos_stein::kernel::{contract, contract_unrestricted};
use chaos_stein::sampling::{random_chaos_sum, random_kernel};
use chaos_stein::verify::multiplication_residual;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_formula(m in 4usize..=9, p in 0.05f64..0.95, n1 in 1usize..=3, n2 in 1usize..=3, seed: u64) {
        let space = OutcomeSpace::new(m, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_kernel(n1, m, 5, &mut rng);
        let g = random_kernel(n2, m, 5, &mut rng);
        prop_assert!(multiplication_residual(space, &f, &g).unwrap() <= 1e-10);
    }

    #[test]
    fn contraction_norm_is_symmetric(m in 3usize..=8, n in 1usize..=3, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_kernel(n, m, 6, &mut rng);
        let g = random_kernel(n, m, 6, &mut rng);
        for k in 1..=n {
            for l in 0..=k {
                let a = contract(&f, &g, k, l).unwrap().norm_sq();
                let b = contract(&g, &f, k, l).unwrap().norm_sq();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn contraction_bounds(m in 3usize..=9, na in 1usize..=3, nb in 1usize..=3, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_kernel(na, m, 6, &mut rng);
        let b = random_kernel(nb, m, 6, &mut rng);
        for k in 1..=na.min(nb) {
            for l in 0..k {
                let lhs = contract(&a, &b, k, l).unwrap().norm_sq();
                let rhs = 0.5 * contract(&a, &a, na, l + na - k).unwrap().norm_sq()
                    + 0.5 * contract(&b, &b, nb, l + nb - k).unwrap().norm_sq();
                prop_assert!(lhs <= rhs + 1e-12, "k={} l={}: {} > {}", k, l, lhs, rhs);
            }
        }
        for k in 0..=na.min(nb) {
            let lhs = contract(&a, &b, k, k).unwrap().norm_sq();
            let rhs = 0.5 * contract_unrestricted(&a, &a, na - k, na - k).unwrap().norm_sq()
                + 0.5 * contract_unrestricted(&b, &b, nb - k, nb - k).unwrap().norm_sq();
            prop_assert!(lhs <= rhs + 1e-12, "k=l={}: {} > {}", k, lhs, rhs);
        }
    }

    #[test]
    fn chaos_sum_evaluation_routes_agree(m in 2usize..=9, p in 0.05f64..0.95, top in 1usize..=3, seed: u64) {
        let space = OutcomeSpace::new(m, p).unwrap();
        let chaos = random_chaos_sum(m, top, 6, &mut ChaCha8Rng::seed_from_u64(seed));
        let fast = chaos.evaluate(space).unwrap();
        let direct = chaos.evaluate_direct(space).unwrap();
        prop_assert!(fast.sup_distance(&direct).unwrap() <= 1e-10);
        prop_assert!((fast.variance() - chaos.variance()).abs() <= 1e-10);
        prop_assert!((fast.variance() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn stein_bound_dominates_distance(m in 3usize..=9, p in 0.1f64..0.9, top in 1usize..=3, seed: u64) {
        let space = OutcomeSpace::new(m, p).unwrap();
        let chaos = random_chaos_sum(m, top, 6, &mut ChaCha8Rng::seed_from_u64(seed));
        let f = chaos.evaluate(space).unwrap();
        let terms = f.stein_bound().unwrap();
        prop_assert!(f.kolmogorov_to_normal() <= terms.total + 1e-12);
    }
}
