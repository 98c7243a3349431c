mod common;

use chaos_stein::bounds::{
    gamma_bound_single, gauss_bound_single, second_chaos_gamma_interior, second_chaos_gauss_interior, Metric,
};
use chaos_stein::chaos::{derivative_norm_sq, malliavin_inner, multiply, ChaosVector};
use chaos_stein::combin::factorial;
use chaos_stein::tensor::gram_inner;
use chaos_stein::wick::{exact_moment, WickOracle};
use proptest::prelude::*;
use common::{random_kernel, space};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn isometry_and_orthogonality(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=3, q in 1usize..=3, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let f = random_kernel(&s, p, &mut rng);
        let g = random_kernel(&s, q, &mut rng);
        let prod = multiply(&f, &g).unwrap();
        let lhs = exact_moment(&prod, 1).unwrap();
        let rhs = if p == q { factorial(q) * gram_inner(&f, &g).unwrap() } else { 0.0 };
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn multiplication_matches_pathwise_product(seed in any::<u64>(), d in 1usize..=3, p in 1usize..=3, q in 1usize..=3) {
        let (s, mut rng) = space(seed, d, false);
        let f = random_kernel(&s, p, &mut rng);
        let g = random_kernel(&s, q, &mut rng);
        let xi: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = chaos_stein::chaos::eval_chaos(&ChaosVector::single(&f), &xi).unwrap();
        let b = chaos_stein::chaos::eval_chaos(&ChaosVector::single(&g), &xi).unwrap();
        let ab = chaos_stein::chaos::eval_chaos(&multiply(&f, &g).unwrap(), &xi).unwrap();
        prop_assert!((a * b - ab).abs() < 1e-10 * (1.0 + ab.abs()));
    }

    #[test]
    fn power_times_derivative_norm_identity(seed in any::<u64>(), d in 1usize..=3, q in 2usize..=3, s_pow in 0u32..=3, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let f = ChaosVector::single(&random_kernel(&s, q, &mut rng));
        let dnorm = derivative_norm_sq(&f).unwrap();
        let oracle = WickOracle::default();
        let lhs = oracle.expect_product(&[(&f, s_pow), (&dnorm, 1)]).unwrap();
        let rhs = q as f64 / (s_pow as f64 + 1.0) * oracle.moment(&f, s_pow + 2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn malliavin_inner_is_scaled_derivative_norm(seed in any::<u64>(), d in 1usize..=3, q in 1usize..=4) {
        let (s, mut rng) = space(seed, d, false);
        let f = ChaosVector::single(&random_kernel(&s, q, &mut rng));
        let m = malliavin_inner(&f).unwrap();
        let dn = derivative_norm_sq(&f).unwrap().scaled(1.0 / q as f64);
        prop_assert!((m.constant_term() - dn.constant_term()).abs() < 1e-12 * (1.0 + m.constant_term().abs()));
        for k in m.terms() {
            let other = dn.term(k.order()).unwrap();
            for (idx, c) in k.entries() {
                prop_assert!((c - other.coeff(idx)).abs() < 1e-12 * (1.0 + c.abs()));
            }
        }
        prop_assert!((m.constant_term() - f.second_moment()).abs() < 1e-10 * (1.0 + f.second_moment()));
    }

    #[test]
    fn gauss_single_is_exact(seed in any::<u64>(), d in 1usize..=3, q in 2usize..=3, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let k = random_kernel(&s, q, &mut rng);
        let f = ChaosVector::single(&k);
        let y = ChaosVector::constant(&s, 1.0).axpy(-1.0, &malliavin_inner(&f).unwrap()).unwrap();
        let oracle = exact_moment(&y, 2).unwrap();
        let rep = gauss_bound_single(&k, q, Metric::Kolmogorov).unwrap();
        prop_assert!((rep.squared_total - oracle).abs() < 1e-10 * (1.0 + oracle), "{} vs {oracle}", rep.squared_total);
        prop_assert!(rep.upper_total.unwrap() >= rep.squared_total - 1e-12);
    }

    #[test]
    fn second_chaos_identities(seed in any::<u64>(), d in 1usize..=3, nu in 0.2f64..4.0, corr in any::<bool>()) {
        let (s, mut rng) = space(seed, d, corr);
        let k = random_kernel(&s, 2, &mut rng);
        let f = ChaosVector::single(&k);
        let m2 = exact_moment(&f, 2).unwrap();
        let m3 = exact_moment(&f, 3).unwrap();
        let m4 = exact_moment(&f, 4).unwrap();
        let dn = derivative_norm_sq(&f).unwrap();
        let half = dn.scaled(0.5);
        let one = ChaosVector::constant(&s, 1.0);

        let lhs = exact_moment(&one.axpy(-1.0, &half).unwrap(), 2).unwrap();
        let rhs = second_chaos_gauss_interior(m2, m4);
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()), "int {lhs} vs {rhs}");

        let y = f.scaled(2.0).axpy(-1.0, &half).unwrap().axpy(2.0 * nu, &one).unwrap();
        let lhs = exact_moment(&y, 2).unwrap();
        let rhs = second_chaos_gamma_interior(nu, m2, m3, m4);
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()), "int2 {lhs} vs {rhs}");
        let rep = gamma_bound_single(&k, 2, nu, Metric::H2).unwrap();
        prop_assert!((rep.squared_total - rhs).abs() < 1e-8 * (1.0 + rhs.abs()));

        let d4 = exact_moment(&dn, 2).unwrap();
        let rhs = 2.0 / 3.0 * m4 + 2.0 * m2 * m2;
        prop_assert!((d4 - rhs).abs() < 1e-8 * (1.0 + rhs.abs()), "fourth moment {d4} vs {rhs}");
    }
}
