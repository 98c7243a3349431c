mod common;

use chaos_stein::bounds::{gamma_bound_sum, gauss_bound_single, gauss_bound_sum, Metric};
use chaos_stein::chaos::{malliavin_inner, ChaosVector};
use chaos_stein::tensor::{contract, gram_inner, symmetrize, tensor_power, Tensor};
use chaos_stein::wick::{exact_moment, WickOracle};
use common::{random_kernel, random_vector, space};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn symmetrization_does_not_increase_norm(
        seed in any::<u64>(), d in 1usize..=4, p in 1usize..=3, q in 1usize..=3, corr in any::<bool>()
    ) {
        let (s, mut rng) = space(seed, d, corr);
        let f = random_kernel(&s, p, &mut rng);
        let g = random_kernel(&s, q, &mut rng);
        for r in 0..=p.min(q) {
            let raw = contract(&f, &g, r).unwrap();
            let sym = symmetrize(&raw);
            prop_assert!(sym.norm() <= raw.norm() + 1e-12, "r={r}: {} > {}", sym.norm(), raw.norm());
        }
    }

    #[test]
    fn symmetrize_is_idempotent(seed in any::<u64>(), d in 1usize..=3, q in 1usize..=4, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let data: Vec<f64> = (0..d.pow(q as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = Tensor::from_data(&s, q, data).unwrap();
        let once = symmetrize(&t);
        let twice = symmetrize(&once.to_dense());
        for (idx, c) in once.entries() {
            prop_assert!((twice.coeff(idx) - c).abs() < 1e-14);
        }
        prop_assert_eq!(once.entries().count(), twice.entries().count());
    }

    #[test]
    fn contraction_norm_identity(
        seed in any::<u64>(), d in 1usize..=3, qi in 1usize..=3, qj in 1usize..=3, corr in any::<bool>()
    ) {
        let (s, mut rng) = space(seed, d, corr);
        let fi = random_kernel(&s, qi, &mut rng);
        let fj = random_kernel(&s, qj, &mut rng);
        for r in 0..=qi.min(qj) {
            let lhs = contract(&fi, &fj, r).unwrap().norm_sq();
            let a = contract(&fi, &fi, qi - r).unwrap();
            let b = contract(&fj, &fj, qj - r).unwrap();
            let rhs = a.inner(&b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "r={r}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn rank_one_product_norm(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=3, q in 1usize..=3, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let f = tensor_power(&s, &random_vector(d, &mut rng), p as i64).unwrap();
        let g = tensor_power(&s, &random_vector(d, &mut rng), q as i64).unwrap();
        let fg = contract(&f, &g, 0).unwrap();
        let full = fg.inner(&fg).unwrap();
        let want = gram_inner(&f, &f).unwrap() * gram_inner(&g, &g).unwrap();
        prop_assert!((full - want).abs() < 1e-12 * (1.0 + want), "{full} vs {want}");
    }

    #[test]
    fn bounds_are_nonnegative_and_upper_forms_dominate(seed in any::<u64>(), d in 1usize..=3, q in 2usize..=3, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let k = random_kernel(&s, q, &mut rng);
        let rep = gauss_bound_single(&k, q, Metric::Wasserstein).unwrap();
        prop_assert!(rep.bound >= 0.0 && rep.squared_total >= 0.0);
        prop_assert!(rep.upper_total.unwrap() >= rep.squared_total - 1e-12);
        prop_assert!(rep.contraction_terms.iter().all(|t| t.value >= 0.0));
    }

    #[test]
    fn sum_bound_dominates_exact(seed in any::<u64>(), d in 1usize..=2, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let f2 = random_kernel(&s, 2, &mut rng).scaled(0.5);
        let f3 = random_kernel(&s, 3, &mut rng).scaled(0.3);
        let z = ChaosVector::single(&f2).axpy(1.0, &ChaosVector::single(&f3)).unwrap();
        let one = ChaosVector::constant(&s, 1.0);
        let y = one.axpy(-1.0, &malliavin_inner(&z).unwrap()).unwrap();
        let exact = exact_moment(&y, 2).unwrap();
        let rep = gauss_bound_sum(&[(2, f2), (3, f3)], Metric::Kolmogorov).unwrap();
        prop_assert!(rep.squared_total >= exact - 1e-10, "{} < {exact}", rep.squared_total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gamma_sum_bound_dominates_exact(seed in any::<u64>(), nu1 in 0.2f64..2.0, nu2 in 0.2f64..2.0) {
        let (s, mut rng) = space(seed, 2, false);
        let f2 = random_kernel(&s, 2, &mut rng).scaled(0.5);
        let f6 = random_kernel(&s, 6, &mut rng).scaled(0.05);
        let z = ChaosVector::single(&f2).axpy(1.0, &ChaosVector::single(&f6)).unwrap();
        let one = ChaosVector::constant(&s, 1.0);
        let y = z.scaled(2.0)
            .axpy(2.0 * (nu1 + nu2), &one).unwrap()
            .axpy(-1.0, &malliavin_inner(&z).unwrap()).unwrap();
        // the square of a degree-10 expansion needs a higher guard
        let exact = WickOracle::with_max_degree(20).moment(&y, 2).unwrap();
        let rep = gamma_bound_sum(&f2, 2, nu1, &f6, 6, nu2, Metric::H2).unwrap();
        prop_assert!(rep.squared_total >= exact - 1e-9 * (1.0 + exact), "{} < {exact}", rep.squared_total);
    }
}
