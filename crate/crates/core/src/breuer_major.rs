//! Hermite variations of fractional Brownian motion increments: the
//! autocovariance `rho_H`, the normalization `sigma`, and the exact value of
//! the fourth-moment bound for
//! `Z_n = (sigma sqrt(n))^{-1} sum_k H_q(n^H (B_{(k+1)/n} - B_{k/n}))`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, ContractionTerm, Metric};
use crate::combin::{binomial, factorial};
use crate::error::{Error, Result};
use crate::tensor::{GramSpace, SymKernel};

/// Below this `T` the series for sigma is summed term by term; the rest
/// comes from an asymptotic expansion of `rho^q` summed in closed form.
const SIGMA_DIRECT_TERMS: u64 = 1000;

/// `n` above which `q = 2` switches to the O(n^2) trace path by default.
pub const QUADRATIC_FAST_PATH_FROM: usize = 256;

/// Default cap on inner-loop evaluations for the difference-sum path.
pub const DEFAULT_OPERATION_BUDGET: f64 = 4e9;

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Hurst index {h} outside (0, 1)")))
    }
}

/// `rho_H(k) = ½(|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H})`.
pub fn rho(h: f64, k: i64) -> Result<f64> {
    check_h(h)?;
    Ok(rho_unchecked(h, k))
}

pub(crate) fn rho_unchecked(h: f64, k: i64) -> f64 {
    let k = k.unsigned_abs() as f64;
    if k == 0.0 {
        return 1.0;
    }
    let e = 2.0 * h;
    if k < RHO_SERIES_FROM {
        return 0.5 * ((k + 1.0).powf(e) + (k - 1.0).powf(e) - 2.0 * k.powf(e));
    }
    // the closed form cancels catastrophically for large k;
    // rho(k) = k^{2H} sum_{j>=1} C(2H, 2j) k^{-2j}
    let x2 = 1.0 / (k * k);
    let mut acc = 0.0;
    let mut pow = x2;
    for j in 1..=8 {
        acc += gen_binomial(e, 2 * j) * pow;
        pow *= x2;
    }
    k.powf(e) * acc
}

const RHO_SERIES_FROM: f64 = 32.0;

/// Largest admissible Hurst index (exclusive) for Hermite rank `q`.
pub fn critical_hurst(q: usize) -> f64 {
    (2 * q - 1) as f64 / (2 * q) as f64
}

fn check_instance(h: f64, q: usize) -> Result<()> {
    check_h(h)?;
    if q < 1 {
        return Err(Error::InvalidOrder(format!("Hermite rank {q} < 1")));
    }
    if h >= critical_hurst(q) {
        return Err(Error::Divergence(format!(
            "sum of rho_H(t)^q diverges for H = {h} >= {} (q = {q})",
            critical_hurst(q)
        )));
    }
    Ok(())
}

/// Generalized binomial coefficient `C(a, n)` for real `a`.
fn gen_binomial(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64)
}

/// Hurwitz zeta `sum_{t>=0} (t+a)^{-s}` by Euler–Maclaurin; accurate for
/// `a` in the hundreds and `s > 1`.
fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    // B_2, B_4, B_6, B_8 / (2j)!
    const B: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let mut acc = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    let mut rising = s; // s (s+1) ... (s+2j-2)
    for (j, b) in B.iter().enumerate() {
        let p = 2 * j + 1;
        acc += b * rising * a.powf(-s - p as f64);
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
    }
    acc
}

/// `sum_{t > T} rho_H(t)^q` from the expansion
/// `rho_H(t) = t^{2H-2} sum_{k>=0} C(2H, 2k+2) t^{-2k}`.
fn sigma_tail(h: f64, q: usize, t_max: u64) -> f64 {
    const TERMS: usize = 8;
    let base: Vec<f64> = (0..TERMS).map(|k| gen_binomial(2.0 * h, 2 * k + 2)).collect();
    // coefficients of (sum base_k x^k)^q, x = t^{-2}
    let mut series = vec![1.0];
    for _ in 0..q {
        let mut next = vec![0.0; TERMS];
        for (i, a) in series.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                if i + j < TERMS {
                    next[i + j] += a * b;
                }
            }
        }
        series = next;
    }
    let s0 = q as f64 * (2.0 - 2.0 * h);
    let a = (t_max + 1) as f64;
    series
        .iter()
        .enumerate()
        .map(|(m, b)| b * hurwitz_zeta(s0 + 2.0 * m as f64, a))
        .sum()
}

/// `sum_{t in Z} rho_H(t)^q`.
pub fn rho_power_sum(h: f64, q: usize) -> Result<f64> {
    check_instance(h, q)?;
    let mut direct = 0.0;
    // smallest terms first
    for t in (1..=SIGMA_DIRECT_TERMS).rev() {
        direct += rho_unchecked(h, t as i64).powi(q as i32);
    }
    Ok(1.0 + 2.0 * (direct + sigma_tail(h, q, SIGMA_DIRECT_TERMS)))
}

/// `sigma = sqrt(q!^{-1} sum_{t in Z} rho_H(t)^q)`.
pub fn sigma(h: f64, q: usize) -> Result<f64> {
    Ok((rho_power_sum(h, q)? / factorial(q)).sqrt())
}

/// Normalization used for the quadratic variation statement at `q = 2`,
/// where `B^2 - 1 = 2 H_2(B)`: `sigma_H = 2 sigma`.
pub fn sigma_quadratic_variation(h: f64) -> Result<f64> {
    Ok(2.0 * sigma(h, 2)?)
}

/// A `(H, q, n)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmInstance {
    pub hurst: f64,
    pub q: usize,
    pub n: usize,
}

impl BmInstance {
    pub fn new(hurst: f64, q: usize, n: usize) -> Result<Self> {
        check_instance(hurst, q)?;
        if q < 2 {
            return Err(Error::InvalidOrder(format!("Hermite rank {q} < 2")));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(BmInstance { hurst, q, n })
    }
}

/// Powers `rho(d)^m` for `d in (-n, n)`, `m <= max_pow`.
struct RhoPowers {
    n: usize,
    stride: usize,
    table: Vec<f64>,
}

impl RhoPowers {
    fn new(h: f64, n: usize, max_pow: usize) -> Self {
        let stride = 2 * n - 1;
        let mut table = vec![0.0; (max_pow + 1) * stride];
        for d in 0..stride {
            let r = rho_unchecked(h, d as i64 - (n as i64 - 1));
            let mut p = 1.0;
            for m in 0..=max_pow {
                table[m * stride + d] = p;
                p *= r;
            }
        }
        RhoPowers { n, stride, table }
    }

    fn row(&self, m: usize) -> &[f64] {
        &self.table[m * self.stride..(m + 1) * self.stride]
    }

    #[inline]
    fn at(row: &[f64], n: usize, d: i64) -> f64 {
        row[(d + n as i64 - 1) as usize]
    }
}

/// `E[Z_n^2] = (q! sigma^2 n)^{-1} sum_{|t|<n} (n - |t|) rho(t)^q`.
pub fn bm_second_moment(inst: &BmInstance) -> Result<f64> {
    let s = sigma(inst.hurst, inst.q)?;
    Ok(second_moment_with(inst, s))
}

fn second_moment_with(inst: &BmInstance, sig: f64) -> f64 {
    let n = inst.n;
    let mut acc = 0.0;
    for t in (1..n).rev() {
        acc += 2.0 * (n - t) as f64 * rho_unchecked(inst.hurst, t as i64).powi(inst.q as i32);
    }
    acc += n as f64;
    acc / (factorial(inst.q) * sig * sig * n as f64)
}

/// How the four-index contraction sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BmMethod {
    /// Quadratic trace path for `q = 2` above the threshold, difference sums otherwise.
    Auto,
    /// Literal O(n^4) sums; reference only.
    Naive,
    /// O(n^3) sums over index differences.
    DifferenceSums,
    /// `q = 2` only: O(n^2) evaluation of `tr(R^4)`.
    Quadratic,
}

/// Evaluation settings for [`bm_bound_exact_with`].
#[derive(Debug, Clone, Copy)]
pub struct BmOptions {
    pub method: BmMethod,
    pub operation_budget: f64,
}

impl Default for BmOptions {
    fn default() -> Self {
        BmOptions {
            method: BmMethod::Auto,
            operation_budget: DEFAULT_OPERATION_BUDGET,
        }
    }
}

/// Symmetrization weight of the `alpha` pairing pattern:
/// `C(p, alpha) C(p, p - alpha) / C(2p, p)`.
fn pairing_weight(p: usize, alpha: usize) -> f64 {
    binomial(p, alpha) * binomial(p, p - alpha) / binomial(2 * p, p)
}

/// `sum_{i,j,k,l} rho(k-l)^r rho(i-j)^r rho(k-i)^a rho(k-j)^{p-a}
///  rho(l-i)^{p-a} rho(l-j)^a` by brute force.
fn four_index_naive(pw: &RhoPowers, r: usize, p: usize, a: usize) -> f64 {
    let n = pw.n as i64;
    let (rr, ra, rb) = (pw.row(r), pw.row(a), pw.row(p - a));
    let at = |row: &[f64], d: i64| RhoPowers::at(row, pw.n, d);
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            let kl = at(rr, k - l);
            for i in 0..n {
                let x = kl * at(ra, k - i) * at(rb, l - i);
                for j in 0..n {
                    acc += x * at(rr, i - j) * at(rb, k - j) * at(ra, l - j);
                }
            }
        }
    }
    acc
}

/// Same sum with `k` factored out by stationarity:
/// `sum_{a,b,c} (n - span{0,a,b,c})_+ F(a,b,c)` where `l = k+a`, `i = k+b`,
/// `j = k+c`.
fn four_index_differences(pw: &RhoPowers, r: usize, p: usize, alpha: usize) -> f64 {
    let n = pw.n as i64;
    let (rr, ra, rb) = (pw.row(r), pw.row(alpha), pw.row(p - alpha));
    let at = |row: &[f64], d: i64| RhoPowers::at(row, pw.n, d);
    let partial: Vec<f64> = (-(n - 1)..n)
        .into_par_iter()
        .map(|a| {
            let mut acc_a = 0.0;
            let wa = at(rr, a);
            if wa == 0.0 {
                return 0.0;
            }
            for b in -(n - 1)..n {
                let lo = 0.min(a).min(b);
                let hi = 0.max(a).max(b);
                if hi - lo >= n {
                    continue;
                }
                // need span(lo, hi, c) < n
                let c_lo = hi - n + 1;
                let c_hi = lo + n - 1;
                // rho(k-i)^alpha rho(l-i)^{p-alpha} with k=0, l=a, i=b
                let wb = wa * at(ra, b) * at(rb, a - b);
                if wb == 0.0 {
                    continue;
                }
                let mut acc_b = 0.0;
                for c in c_lo..=c_hi {
                    let span = hi.max(c) - lo.min(c);
                    let mult = (n - span) as f64;
                    acc_b += mult * at(rr, c - b) * at(rb, c) * at(ra, c - a);
                }
                acc_a += wb * acc_b;
            }
            acc_a
        })
        .collect();
    partial.iter().sum()
}

/// `tr(R^4) = ||R^2||_F^2` for the Toeplitz matrix `R[k][l] = rho(k-l)`,
/// walking each diagonal of `R^2` with
/// `(R^2)[k+1][l+1] = (R^2)[k][l] + rho(k+1) rho(l+1) - rho(n-1-k) rho(n-1-l)`.
fn trace_r4(h: f64, n: usize) -> f64 {
    let r: Vec<f64> = (0..n).map(|k| rho_unchecked(h, k as i64)).collect();
    let rho_abs = |d: i64| r[d.unsigned_abs() as usize];
    let entry = |k: usize, l: usize| -> f64 {
        (0..n)
            .map(|m| rho_abs(k as i64 - m as i64) * rho_abs(m as i64 - l as i64))
            .sum()
    };
    let diag = |start: (usize, usize)| -> f64 {
        let (mut k, mut l) = start;
        let mut v = entry(k, l);
        let mut acc = v * v;
        while k + 1 < n && l + 1 < n {
            v += rho_abs(k as i64 + 1) * rho_abs(l as i64 + 1)
                - rho_abs(n as i64 - 1 - k as i64) * rho_abs(n as i64 - 1 - l as i64);
            k += 1;
            l += 1;
            acc += v * v;
        }
        acc
    };
    // R^2 is symmetric: the main diagonal plus twice the upper diagonals
    let upper: Vec<f64> = (1..n).into_par_iter().map(|l| diag((0, l))).collect();
    diag((0, 0)) + 2.0 * upper.iter().sum::<f64>()
}

fn contraction_weight(q: usize, r: usize) -> f64 {
    (q * q) as f64 * factorial(2 * q - 2 * r) * factorial(r - 1).powi(2) * binomial(q - 1, r - 1).powi(4)
}

/// Exact `E[(1 - q^{-1}||DZ_n||^2)^2]` and its Kolmogorov bound.
pub fn bm_bound_exact(inst: &BmInstance) -> Result<BoundReport> {
    bm_bound_exact_with(inst, &BmOptions::default())
}

pub fn bm_bound_exact_with(inst: &BmInstance, opts: &BmOptions) -> Result<BoundReport> {
    let inst = BmInstance::new(inst.hurst, inst.q, inst.n)?;
    let (h, q, n) = (inst.hurst, inst.q, inst.n);
    let sig = sigma(h, q)?;
    let ez2 = second_moment_with(&inst, sig);
    let variance = (1.0 - ez2).powi(2);
    // ||f ⊗_r f||^2 = (q!^4 sigma^4 n^2)^{-1} * (four-index sum)
    let scale = 1.0 / (factorial(q).powi(4) * sig.powi(4) * (n * n) as f64);

    let method = match opts.method {
        BmMethod::Auto if q == 2 && n > QUADRATIC_FAST_PATH_FROM => BmMethod::Quadratic,
        BmMethod::Auto => BmMethod::DifferenceSums,
        m => m,
    };
    if method == BmMethod::Quadratic && q != 2 {
        return Err(Error::InvalidParameter("the quadratic trace path needs q = 2".into()));
    }
    let passes: usize = (1..q).map(|r| q - r + 1).sum();
    let cost = match method {
        BmMethod::Naive => passes as f64 * (n as f64).powi(4),
        BmMethod::DifferenceSums => passes as f64 * (2.0 * n as f64).powi(3),
        _ => (n as f64).powi(2),
    };
    if cost > opts.operation_budget {
        return Err(Error::ResourceLimit(format!(
            "{method:?} for n = {n}, q = {q} needs ~{cost:.2e} operations (budget {:.2e})",
            opts.operation_budget
        )));
    }

    let mut terms = Vec::with_capacity(q - 1);
    let mut upper = variance;
    if method == BmMethod::Quadratic {
        // both pairing patterns reduce to tr(R^4)
        let s = scale * trace_r4(h, n);
        let w = contraction_weight(2, 1);
        terms.push(ContractionTerm { i: 0, j: 0, r: 1, value: w * s });
        upper += w * s;
    } else {
        let pw = RhoPowers::new(h, n, q);
        for r in 1..q {
            let p = q - r;
            let mut sym = 0.0;
            let mut raw = 0.0;
            for alpha in 0..=p {
                // S_alpha = S_{p-alpha} (swap i and j)
                if alpha > p - alpha {
                    break;
                }
                let s = match method {
                    BmMethod::Naive => four_index_naive(&pw, r, p, alpha),
                    _ => four_index_differences(&pw, r, p, alpha),
                };
                let mult = if alpha == p - alpha { 1.0 } else { 2.0 };
                sym += mult * pairing_weight(p, alpha) * s;
                if alpha == 0 {
                    // alpha = p is the unsymmetrized pairing
                    raw = s;
                }
            }
            let w = contraction_weight(q, r);
            terms.push(ContractionTerm {
                i: 0,
                j: 0,
                r,
                value: w * scale * sym,
            });
            upper += w * scale * raw;
        }
    }
    let squared_total = variance + terms.iter().map(|t| t.value).sum::<f64>();
    Ok(BoundReport {
        metric: Metric::Kolmogorov,
        variance_term: variance,
        contraction_terms: terms,
        squared_total,
        metric_constant: 1.0,
        bound: squared_total.max(0.0).sqrt(),
        exact_total: Some(squared_total),
        upper_total: Some(upper),
    })
}

/// Which of the three decay regimes applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateRegime {
    /// `n^{-1/2}` for `H <= 1/2`.
    Diffusive,
    /// `n^{H-1}` for `1/2 <= H <= (2q-3)/(2q-2)`.
    ShortMemory,
    /// `n^{qH-q+1/2}` up to the critical index.
    LongMemory,
}

/// Decay exponent `e` of the Kolmogorov bound, `bound ~ n^{-e}`.
pub fn bm_rate(h: f64, q: usize) -> Result<(f64, RateRegime)> {
    check_instance(h, q)?;
    if q < 2 {
        return Err(Error::InvalidOrder(format!("Hermite rank {q} < 2")));
    }
    let middle_end = (2 * q - 3) as f64 / (2 * q - 2) as f64;
    Ok(if h <= 0.5 {
        (0.5, RateRegime::Diffusive)
    } else if h <= middle_end {
        (1.0 - h, RateRegime::ShortMemory)
    } else {
        (q as f64 - q as f64 * h - 0.5, RateRegime::LongMemory)
    })
}

/// One row of a rate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmRow {
    pub hurst: f64,
    pub q: usize,
    pub n: usize,
    pub variance_term: f64,
    pub squared_total: f64,
    pub kol_bound: f64,
    pub rate_exponent: f64,
    /// `n^{-rate_exponent}`
    pub predicted: f64,
}

pub const BM_CSV_HEADER: [&str; 7] = ["H", "q", "n", "variance_term", "squared_total", "kol_bound", "rate_exponent"];

pub fn bm_table(h: f64, q: usize, ns: &[usize]) -> Result<Vec<BmRow>> {
    bm_table_with(h, q, ns, &BmOptions::default())
}

pub fn bm_table_with(h: f64, q: usize, ns: &[usize], opts: &BmOptions) -> Result<Vec<BmRow>> {
    let (e, _) = bm_rate(h, q)?;
    ns.iter()
        .map(|&n| {
            let rep = bm_bound_exact_with(&BmInstance::new(h, q, n)?, opts)?;
            Ok(BmRow {
                hurst: h,
                q,
                n,
                variance_term: rep.variance_term,
                squared_total: rep.squared_total,
                kol_bound: rep.bound,
                rate_exponent: e,
                predicted: (n as f64).powf(-e),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// The explicit kernel `f_n = n^{qH-1/2} (q! sigma)^{-1} sum_k delta_k^{⊗q}` over
/// the Gram space `<delta_k, delta_l> = n^{-2H} rho(k-l)`.
pub fn bm_kernel(inst: &BmInstance) -> Result<SymKernel> {
    let inst = BmInstance::new(inst.hurst, inst.q, inst.n)?;
    let (h, q, n) = (inst.hurst, inst.q, inst.n);
    let scale = (n as f64).powf(-2.0 * h);
    let g = DMatrix::from_fn(n, n, |k, l| scale * rho_unchecked(h, k as i64 - l as i64));
    let space: Arc<GramSpace> = GramSpace::new(g)?;
    let c = (n as f64).powf(q as f64 * h - 0.5) / (factorial(q) * sigma(h, q)?);
    SymKernel::from_entries(&space, q, (0..n).map(|k| (vec![k; q], c)))
}
