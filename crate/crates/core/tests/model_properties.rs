mod common;

use std::sync::Arc;

use chaos_stein::breuer_major::{bm_table, rho, sigma_quadratic_variation};
use chaos_stein::chaos::{malliavin_inner, ChaosEvaluator, ChaosVector};
use chaos_stein::pearson::{density_from_tau, interior_grid, stein_solve, PearsonSpec, Tau};
use chaos_stein::simulate::{mean_and_std_error, sample_Zn, sample_fbm_increments, sample_normals};
use chaos_stein::tensor::{tensor_power, GramSpace, SymKernel};
use common::{random_kernel, space};
use proptest::prelude::*;

#[test]
fn rho_is_even_and_decays_like_a_power() {
    for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut c: f64 = 0.0;
        for k in 1..=10_000i64 {
            let r = rho(h, k).unwrap();
            assert!((r - rho(h, -k).unwrap()).abs() <= 1e-15);
            c = c.max(r.abs() / (k as f64).powf(2.0 * h - 2.0));
        }
        for k in [20_000i64, 100_000, 1_000_000] {
            let r = rho(h, k).unwrap().abs();
            assert!(r <= c * (k as f64).powf(2.0 * h - 2.0) * (1.0 + 1e-9), "H={h} k={k}");
        }
    }
}

#[test]
fn variance_defect_vanishes_as_n_grows() {
    let ns: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
    for h in [0.3, 0.5, 0.6, 0.7] {
        let rows = bm_table(h, 2, &ns).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].variance_term <= w[0].variance_term + 1e-15, "H={h}: {:?}", w);
        }
        let (first, last) = (rows[0].variance_term, rows.last().unwrap().variance_term);
        // slowest at H = 0.7 (like n^{-0.4}); identically zero at H = 0.5
        assert!(last <= 0.5 * first || last < 1e-28, "H={h}: {first} -> {last}");
    }
}

#[test]
fn quadratic_variation_normalization_agrees() {
    let (h, n, count, seed) = (0.65, 12, 500, 21);
    let z = sample_Zn(h, 2, n, count, seed).unwrap();
    let (x, _) = sample_fbm_increments(h, n, count, seed).unwrap();
    let s = sigma_quadratic_variation(h).unwrap();
    for r in 0..count {
        let v: f64 = x.row(r).iter().map(|v| v * v - 1.0).sum::<f64>() / (s * (n as f64).sqrt());
        assert!((v - z.values[r]).abs() < 1e-12);
    }
}

fn sample_pair(f: &ChaosVector, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let d = f.space().dim();
    let g = malliavin_inner(f).unwrap();
    let (ef, eg) = (ChaosEvaluator::new(f), ChaosEvaluator::new(&g));
    sample_normals(d, count, seed)
        .chunks(d)
        .map(|xi| (ef.eval(xi).unwrap(), eg.eval(xi).unwrap()))
        .collect()
}

#[test]
fn conditional_weight_is_weakly_positive() {
    let tests: [fn(f64) -> f64; 3] = [|_| 1.0, |x| 1.0 + x.tanh(), |x| (-x * x).exp()];
    for seed in 0..4u64 {
        let (s, mut rng) = space(seed, 3, seed % 2 == 1);
        let f = ChaosVector::single(&random_kernel(&s, 2, &mut rng));
        let pairs = sample_pair(&f, 100_000, 100 + seed);
        for g in tests {
            let v: Vec<f64> = pairs.iter().map(|(x, w)| w * g(*x)).collect();
            let (m, se) = mean_and_std_error(&v);
            assert!(m + 3.0 * se >= -1e-8, "seed {seed}: {m} ± {se}");
        }
    }
}

/// `|E h(F) - E h(Z)| <= E[U'(F)^2]^{1/2} E[(tau(F) - <DF,-DL^{-1}F>)^2]^{1/2}`.
fn check_generic_inequality(spec: PearsonSpec, f: &ChaosVector, seed: u64) {
    let tau = Tau::from_spec(&spec).unwrap();
    let density = Arc::new(density_from_tau(&tau).unwrap());
    let grid = interior_grid(&density, 2);
    let (lo, hi) = (grid[0], grid[1]);
    let pairs = sample_pair(f, 100_000, seed);
    type Step = (Box<dyn Fn(f64) -> f64 + Send + Sync>, Vec<f64>);
    let steps: [Step; 2] = [
        (Box::new(|x: f64| x.tanh()), vec![]),
        (Box::new(|x: f64| if x <= 0.5 { 1.0 } else { 0.0 }), vec![0.5]),
    ];
    for (h, breaks) in steps {
        let h: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::from(h);
        let hc = h.clone();
        let sol = stein_solve(&density, move |x| hc(x), &breaks).unwrap();
        let tab = sol.tabulate(lo, hi, 4001).unwrap();
        let hv: Vec<f64> = pairs.iter().map(|(x, _)| h(*x)).collect();
        let (eh, se) = mean_and_std_error(&hv);
        let lhs = (eh - sol.mean_h()).abs();
        let du2 = pairs.iter().map(|(x, _)| tab.derivative(*x).unwrap().powi(2)).sum::<f64>() / pairs.len() as f64;
        let gap2 = pairs.iter().map(|(x, w)| (tau.eval(*x) - w).powi(2)).sum::<f64>() / pairs.len() as f64;
        let rhs = du2.sqrt() * gap2.sqrt();
        assert!(lhs <= rhs + 3.0 * se, "{spec:?}: {lhs} > {rhs} + 3*{se}");
    }
}

#[test]
fn generic_inequality_gaussian_target() {
    let (s, mut rng) = space(7, 3, false);
    let k = random_kernel(&s, 2, &mut rng);
    let k = k.scaled(1.0 / (2.0 * k.norm_sq()).sqrt());
    check_generic_inequality(PearsonSpec::normal(), &ChaosVector::single(&k), 70);
}

#[test]
fn generic_inequality_gamma_target() {
    let s = GramSpace::identity(3);
    let base = tensor_power(&s, &[1.0, 0.0, 0.0], 2).unwrap();
    let pert = SymKernel::from_entries(&s, 2, vec![(vec![1, 2], 0.3), (vec![0, 1], 0.1)]).unwrap();
    let k = base.axpy(1.0, &pert).unwrap();
    check_generic_inequality(PearsonSpec::centered_gamma(1.0).unwrap(), &ChaosVector::single(&k), 71);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stein_residual_vanishes(which in 0usize..4, c in 0.3f64..2.0, z in -1.0f64..1.0) {
        let spec = match which {
            0 => PearsonSpec::normal(),
            1 => PearsonSpec::centered_gamma(1.0).unwrap(),
            2 => PearsonSpec::centered_gamma(2.5).unwrap(),
            _ => PearsonSpec::uniform(),
        };
        let density = Arc::new(density_from_tau(&Tau::from_spec(&spec).unwrap()).unwrap());
        let sol = stein_solve(&density, move |x: f64| (c * x + z).tanh(), &[]).unwrap();
        let grid = interior_grid(&density, 41);
        for &x in &grid[2..grid.len() - 2] {
            let r = sol.residual(x).unwrap();
            prop_assert!(r.abs() < 1e-6, "{spec:?} x={x}: {r}");
        }
    }
}
