//! Monte Carlo: fractional Gaussian noise, Breuer–Major statistics, chaos
//! samples, empirical distances and the Mehler weight `S(v)`.
//!
//! Randomness comes in fixed-size batches, each with its own ChaCha stream
//! keyed by `(seed, batch index)`, so results do not depend on the number of
//! worker threads.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::breuer_major::{rho, sigma, BmInstance};
use crate::chaos::{hermite_table, ChaosEvaluator, ChaosVector};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Rows (draws) generated per RNG stream.
pub const BATCH_ROWS: usize = 1024;

/// Above this length the increments come from circulant embedding.
pub const CHOLESKY_MAX_N: usize = 1024;

/// Relative tolerance for negative circulant eigenvalues.
const EMBEDDING_TOLERANCE: f64 = 1e-10;

/// Draws plus enough metadata to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub meta: String,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len() as f64;
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
    }

    /// One value per line after a `# key=value` comment header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# seed={} {}", self.seed, self.meta)?;
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

/// The stream for batch `index` of run `seed`.
pub fn batch_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `row(rng, out)` for `count` rows of width `width`, batch by batch in
/// parallel, and concatenates the rows in batch order.
fn batched_rows<F>(count: usize, width: usize, seed: u64, row: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha20Rng, &mut [f64]) + Sync,
{
    let batches = count.div_ceil(BATCH_ROWS);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let rows = BATCH_ROWS.min(count - b * BATCH_ROWS);
            let mut rng = batch_rng(seed, b as u64);
            let mut out = vec![0.0; rows * width];
            for r in out.chunks_mut(width.max(1)) {
                row(&mut rng, r);
            }
            out
        })
        .collect();
    chunks.concat()
}

fn fill_normals(rng: &mut ChaCha20Rng, out: &mut [f64]) {
    for v in out {
        *v = rng.sample(StandardNormal);
    }
}

/// How increments are generated for one `(H, n)`.
#[derive(Debug, Clone)]
pub enum FgnGenerator {
    /// Lower Cholesky factor of the Toeplitz covariance.
    Cholesky(DMatrix<f64>),
    /// Square roots of the circulant eigenvalues (already divided by the
    /// embedding size), on a circle of length `m >= 2(n-1)`.
    Circulant { n: usize, sqrt_eig: Arc<Vec<f64>> },
}

impl FgnGenerator {
    /// Cholesky up to [`CHOLESKY_MAX_N`], circulant embedding above, falling
    /// back to Cholesky when the embedding has negative eigenvalues.
    pub fn new(h: f64, n: usize) -> Result<(Self, String)> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("Hurst index {h} outside (0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if n > CHOLESKY_MAX_N {
            match Self::circulant(h, n)? {
                Some(g) => return Ok((g, "generator=circulant".into())),
                None => {
                    let g = Self::cholesky(h, n)?;
                    return Ok((g, "generator=cholesky fallback=negative-circulant-eigenvalue".into()));
                }
            }
        }
        Ok((Self::cholesky(h, n)?, "generator=cholesky".into()))
    }

    pub fn cholesky(h: f64, n: usize) -> Result<Self> {
        let r: Vec<f64> = (0..n as i64).map(|k| rho(h, k)).collect::<Result<_>>()?;
        let cov = DMatrix::from_fn(n, n, |i, j| r[i.abs_diff(j)]);
        let l = cov
            .cholesky()
            .ok_or_else(|| Error::NotPsd(format!("increment covariance for H = {h}, n = {n}")))?
            .unpack();
        Ok(FgnGenerator::Cholesky(l))
    }

    /// `None` when the embedding is not nonnegative definite.
    pub fn circulant(h: f64, n: usize) -> Result<Option<Self>> {
        let m = (2 * (n - 1)).max(2).next_power_of_two();
        let half = m / 2;
        let mut c = vec![Complex::new(0.0, 0.0); m];
        for (k, slot) in c.iter_mut().enumerate() {
            let lag = if k <= half { k } else { m - k };
            *slot = Complex::new(rho(h, lag as i64)?, 0.0);
        }
        FftPlanner::new().plan_fft_forward(m).process(&mut c);
        let max = c.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let mut sqrt_eig = Vec::with_capacity(m);
        for z in &c {
            if z.re < -EMBEDDING_TOLERANCE * max {
                return Ok(None);
            }
            sqrt_eig.push((z.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Some(FgnGenerator::Circulant {
            n,
            sqrt_eig: Arc::new(sqrt_eig),
        }))
    }

    pub fn len(&self) -> usize {
        match self {
            FgnGenerator::Cholesky(l) => l.nrows(),
            FgnGenerator::Circulant { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One increment vector into `out`.
    pub fn sample_into(&self, rng: &mut ChaCha20Rng, out: &mut [f64]) {
        match self {
            FgnGenerator::Cholesky(l) => {
                let n = l.nrows();
                let mut z = DVector::zeros(n);
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let x = l * z;
                out.copy_from_slice(x.as_slice());
            }
            FgnGenerator::Circulant { n, sqrt_eig } => {
                let m = sqrt_eig.len();
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        Complex::new(s * a, s * b)
                    })
                    .collect();
                FftPlanner::new().plan_fft_forward(m).process(&mut w);
                // real and imaginary parts are independent draws; keep the real part
                for (o, z) in out.iter_mut().zip(&w[..*n]) {
                    *o = z.re;
                }
            }
        }
    }
}

/// `count` rows of normalized increments `n^H (B_{(k+1)/n} - B_{k/n})`,
/// row-major, together with the generator description.
pub fn sample_fbm_increments(h: f64, n: usize, count: usize, seed: u64) -> Result<(DMatrix<f64>, String)> {
    let (gen, meta) = FgnGenerator::new(h, n)?;
    let data = batched_rows(count, n, seed, |rng, row| gen.sample_into(rng, row));
    Ok((DMatrix::from_row_slice(count, n, &data), meta))
}

/// `count` draws of `Z_n = (sigma sqrt n)^{-1} sum_k H_q(X_k)` with
/// `H_q = He_q / q!`.
#[allow(non_snake_case)]
pub fn sample_Zn(h: f64, q: usize, n: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    let inst = BmInstance::new(h, q, n)?;
    let s = sigma(inst.hurst, inst.q)?;
    let (gen, meta) = FgnGenerator::new(h, n)?;
    let norm = 1.0 / (s * (n as f64).sqrt());
    let qf = crate::combin::factorial(q);
    let values = batched_rows(count, 1, seed, |rng, out| {
        let mut x = vec![0.0; n];
        let mut table = vec![0.0; q + 1];
        gen.sample_into(rng, &mut x);
        let mut acc = 0.0;
        for &v in &x {
            hermite_table(v, &mut table);
            acc += table[q];
        }
        out[0] = acc * norm / qf;
    });
    Ok(SampleBatch {
        values,
        seed,
        meta: format!("statistic=Z_n H={h} q={q} n={n} count={count} {meta}"),
    })
}

/// `count` draws of a chaos expansion at i.i.d. standard normal coordinates.
pub fn sample_chaos(f: &ChaosVector, count: usize, seed: u64) -> Result<SampleBatch> {
    let d = f.space().dim();
    let ev = ChaosEvaluator::new(f);
    let values = batched_rows(count, 1, seed, |rng, out| {
        let mut xi = vec![0.0; d];
        fill_normals(rng, &mut xi);
        out[0] = ev.eval(&xi).unwrap_or(f64::NAN);
    });
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("chaos evaluation failed".into()));
    }
    Ok(SampleBatch {
        values,
        seed,
        meta: format!("statistic=chaos dim={d} degree={} count={count}", f.degree()),
    })
}

/// `count` i.i.d. standard normal vectors of length `d`, row-major.
pub fn sample_normals(d: usize, count: usize, seed: u64) -> Vec<f64> {
    batched_rows(count, d, seed, fill_normals)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN in samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `sup_z |F_emp(z) - cdf(z)|`, evaluated on both sides of every jump of
/// the empirical cdf (tied values form a single jump).
pub fn empirical_kolmogorov(samples: &[f64], cdf: &dyn Fn(f64) -> f64) -> Result<f64> {
    let s = sorted(samples)?;
    let n = s.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        let c = cdf(x);
        let below = i as f64 / n;
        let above = j as f64 / n;
        sup = sup.max((c - below).abs()).max((above - c).abs());
        i = j;
    }
    Ok(sup)
}

/// 1-Wasserstein distance estimate: mean `|X_(i) - Q((i - 1/2)/N)|`.
pub fn empirical_wasserstein(samples: &[f64], quantile: &dyn Fn(f64) -> f64) -> Result<f64> {
    let s = sorted(samples)?;
    let n = s.len() as f64;
    Ok(s
        .iter()
        .enumerate()
        .map(|(i, x)| (x - quantile((i as f64 + 0.5) / n)).abs())
        .sum::<f64>()
        / n)
}

/// `sqrt(ln(2/delta) / (2N))`: the DKW deviation at confidence `1 - delta`.
pub fn dkw_allowance(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// A function on `R^d` given through its gradient.
pub type Gradient<'a> = &'a (dyn Fn(&[f64], &mut [f64]) + Sync);

/// Estimate of the Mehler weight with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `S(v) = int_0^1 (2 sqrt t)^{-1} E[grad g(v) . grad g(sqrt t v + sqrt(1-t) V)] dt`.
///
/// With `u = sqrt t` the weight disappears:
/// `S(v) = int_0^1 E[grad g(v) . grad g(u v + sqrt(1-u^2) V)] du`,
/// done with `t_nodes`-point Gauss–Legendre in `u` and `mc_count` draws of
/// `V` shared across nodes.
pub fn chatterjee_weight(grad: Gradient, v: &[f64], t_nodes: usize, mc_count: usize, seed: u64) -> Result<f64> {
    Ok(chatterjee_weight_with_error(grad, v, t_nodes, mc_count, seed)?.value)
}

pub fn chatterjee_weight_with_error(
    grad: Gradient,
    v: &[f64],
    t_nodes: usize,
    mc_count: usize,
    seed: u64,
) -> Result<WeightEstimate> {
    if t_nodes == 0 || mc_count == 0 {
        return Err(Error::InvalidParameter("need at least one node and one draw".into()));
    }
    let d = v.len();
    let (us, ws) = gauss_legendre(t_nodes);
    let mut g0 = vec![0.0; d];
    grad(v, &mut g0);
    let draws = sample_normals(d, mc_count, seed);
    let per_draw: Vec<f64> = draws
        .chunks(d.max(1))
        .take(mc_count)
        .map(|big_v| {
            let mut y = vec![0.0; d];
            let mut gy = vec![0.0; d];
            let mut acc = 0.0;
            for (&u, &w) in us.iter().zip(&ws) {
                let c = (1.0 - u * u).sqrt();
                for k in 0..d {
                    y[k] = u * v[k] + c * big_v[k];
                }
                grad(&y, &mut gy);
                acc += w * g0.iter().zip(&gy).map(|(a, b)| a * b).sum::<f64>();
            }
            acc
        })
        .collect();
    let (value, std_error) = mean_and_std_error(&per_draw);
    Ok(WeightEstimate { value, std_error })
}

/// Sample mean and its standard error.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Both sides of `E[Y f(Y)] = E[S(V) f'(Y)]` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
}

impl MehlerCheck {
    pub fn combined_se(&self) -> f64 {
        self.lhs_se.hypot(self.rhs_se)
    }

    /// `|lhs - rhs|` in units of the combined standard error.
    pub fn z_score(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.combined_se()
    }
}

/// Monte Carlo check of the Mehler identity for `Y = g(V)`; `S(V)` is
/// estimated per draw by [`chatterjee_weight`] with its own stream.
#[allow(clippy::too_many_arguments)]
pub fn mehler_identity_check(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    grad: Gradient,
    f: &(dyn Fn(f64) -> f64 + Sync),
    df: &(dyn Fn(f64) -> f64 + Sync),
    d: usize,
    count: usize,
    t_nodes: usize,
    inner_mc: usize,
    seed: u64,
) -> Result<MehlerCheck> {
    let vs = sample_normals(d, count, seed);
    let pairs: Vec<(f64, f64)> = vs
        .par_chunks(d)
        .enumerate()
        .map(|(i, v)| {
            let y = g(v);
            // inner streams live under a derived seed, one per outer draw
            let s = chatterjee_weight(grad, v, t_nodes, inner_mc, seed ^ 0x9E37_79B9_7F4A_7C15 ^ (i as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
                .unwrap_or(f64::NAN);
            (y * f(y), s * df(y))
        })
        .collect();
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (l, lse) = mean_and_std_error(&lhs);
    let (r, rse) = mean_and_std_error(&rhs);
    Ok(MehlerCheck {
        lhs: l,
        lhs_se: lse,
        rhs: r,
        rhs_se: rse,
    })
}
