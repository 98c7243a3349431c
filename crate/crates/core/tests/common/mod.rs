//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use chaos_stein::combin::for_each_sorted_index;
use chaos_stein::tensor::{GramSpace, SymKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_kernel(space: &Arc<GramSpace>, q: usize, rng: &mut ChaCha8Rng) -> SymKernel {
    let mut entries = Vec::new();
    for_each_sorted_index(space.dim(), q, |idx| entries.push((idx.to_vec(), rng.gen_range(-1.0..1.0))));
    SymKernel::from_entries(space, q, entries).unwrap()
}

/// `A A^T + 0.1 I` for a random square `A`.
pub fn random_gram(d: usize, rng: &mut ChaCha8Rng) -> Arc<GramSpace> {
    let a: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rows = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let v = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum::<f64>() + if i == j { 0.1 } else { 0.0 };
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    GramSpace::from_rows(&rows).unwrap()
}

pub fn space(seed: u64, d: usize, correlated: bool) -> (Arc<GramSpace>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = if correlated { random_gram(d, &mut rng) } else { GramSpace::identity(d) };
    (s, rng)
}

pub fn random_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
