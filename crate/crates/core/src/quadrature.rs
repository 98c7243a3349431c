//! Adaptive Gauss–Kronrod (7/15) quadrature with maps for infinite ranges and
//! a power-law substitution for integrable endpoint singularities, plus
//! Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    /// Purely relative tolerance, for integrals that may be tiny.
    pub fn relative(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
            converged: true,
        }
    }

    fn combine(self, other: QuadResult) -> Self {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            intervals: self.intervals + other.intervals,
            converged: self.converged && other.converged,
        }
    }

    /// The value, or an accuracy error when the estimated error exceeds
    /// `tol * max(1, |value|)`.
    pub fn checked(self, tol: f64, what: &str) -> Result<f64> {
        if !self.value.is_finite() {
            return Err(Error::Accuracy(format!("{what}: non-finite value {}", self.value)));
        }
        if self.error > tol * self.value.abs().max(1.0) {
            return Err(Error::Accuracy(format!(
                "{what}: estimated error {:.3e} on value {:.6e} after {} subintervals",
                self.error, self.value, self.intervals
            )));
        }
        Ok(self.value)
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK15 on a finite interval.
pub fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult::zero();
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    let mut count = 1;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || !err.is_finite() {
            break;
        }
        if count >= opts.max_intervals {
            break;
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // cannot split further
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().map(|p| p.value).sum::<f64>();
    let error = panels.iter().map(|p| p.error).sum::<f64>();
    let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
    QuadResult {
        value,
        error,
        intervals: panels.len(),
        converged: error <= tol,
    }
}

/// `int_a^b f`, either bound may be infinite. Half-lines use
/// `x = a + t/(1-t)` on `t in (0,1)`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a > b {
        let mut r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => gauss_kronrod(f, a, b, opts),
        (true, false) => {
            let g = |t: f64| {
                let x = a + t / (1.0 - t);
                if x.is_finite() {
                    f(x) / ((1.0 - t) * (1.0 - t))
                } else {
                    0.0
                }
            };
            gauss_kronrod(&g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let g = |t: f64| {
                let x = b - t / (1.0 - t);
                if x.is_finite() {
                    f(x) / ((1.0 - t) * (1.0 - t))
                } else {
                    0.0
                }
            };
            gauss_kronrod(&g, 0.0, 1.0, opts)
        }
        (false, false) => integrate(f, a, 0.0, opts).combine(integrate(f, 0.0, b, opts)),
    }
}

/// Like [`integrate`], but each finite endpoint is treated as a possible
/// integrable singularity: near it `x = end ± w s^4`, which turns
/// `|x - end|^{-1/2}` into a smooth integrand.
pub fn integrate_singular(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a > b {
        let mut r = integrate_singular(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    if a == b {
        return QuadResult::zero();
    }
    let left = |lo: f64, w: f64| {
        move |s: f64| {
            let s3 = s * s * s;
            f(lo + w * s3 * s) * 4.0 * w * s3
        }
    };
    let right = |hi: f64, w: f64| {
        move |s: f64| {
            let s3 = s * s * s;
            f(hi - w * s3 * s) * 4.0 * w * s3
        }
    };
    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let m = 0.5 * (a + b);
            gauss_kronrod(&left(a, m - a), 0.0, 1.0, opts).combine(gauss_kronrod(&right(b, b - m), 0.0, 1.0, opts))
        }
        (true, false) => {
            let w = a.abs().max(1.0);
            gauss_kronrod(&left(a, w), 0.0, 1.0, opts).combine(integrate(f, a + w, b, opts))
        }
        (false, true) => {
            let w = b.abs().max(1.0);
            integrate(f, a, b - w, opts).combine(gauss_kronrod(&right(b, w), 0.0, 1.0, opts))
        }
        (false, false) => integrate(f, a, b, opts),
    }
}

/// `int_a^b f` split at interior `breaks` (e.g. discontinuities of `f`);
/// the outer endpoints get the singular treatment.
pub fn integrate_with_breaks(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.is_empty() {
        return integrate_singular(f, a, b, opts);
    }
    let mut out = QuadResult::zero();
    let mut lo = a;
    for (k, &p) in pts.iter().enumerate() {
        let piece = if k == 0 {
            // finite ends of the first piece: only `a` can be singular
            if a.is_finite() {
                integrate_singular_left(f, a, p, opts)
            } else {
                integrate(f, a, p, opts)
            }
        } else {
            integrate(f, lo, p, opts)
        };
        out = out.combine(piece);
        lo = p;
    }
    let last = if b.is_finite() {
        integrate_singular_right(f, lo, b, opts)
    } else {
        integrate(f, lo, b, opts)
    };
    out.combine(last)
}

fn integrate_singular_left(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    let w = b - a;
    let g = |s: f64| {
        let s3 = s * s * s;
        f(a + w * s3 * s) * 4.0 * w * s3
    };
    gauss_kronrod(&g, 0.0, 1.0, opts)
}

fn integrate_singular_right(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    let w = b - a;
    let g = |s: f64| {
        let s3 = s * s * s;
        f(b - w * s3 * s) * 4.0 * w * s3
    };
    gauss_kronrod(&g, 0.0, 1.0, opts)
}

/// `n`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = gauss_kronrod(&|x: f64| x.powi(5) - 2.0 * x, -1.0, 2.0, &QuadOptions::default());
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn infinite_ranges() {
        let opts = QuadOptions::default();
        let r = integrate(&|x: f64| (-x * x / 2.0).exp(), f64::NEG_INFINITY, f64::INFINITY, &opts);
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10);
        let r = integrate(&|x: f64| (-x).exp(), 0.0, f64::INFINITY, &opts);
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate(&|x: f64| x.exp(), f64::NEG_INFINITY, 1.0, &opts);
        assert!((r.value - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn endpoint_singularities() {
        let opts = QuadOptions::default();
        let r = integrate_singular(&|x: f64| 1.0 / (1.0 - x * x).sqrt(), -1.0, 1.0, &opts);
        assert!((r.value - PI).abs() < 1e-9, "{}", r.value);
        assert!(r.converged);
        let r = integrate_singular(&|x: f64| (-x).exp() / x.sqrt(), 0.0, f64::INFINITY, &opts);
        assert!((r.value - PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_for_steps() {
        let opts = QuadOptions::default();
        let step = |x: f64| if x <= 0.3 { 1.0 } else { 0.0 };
        let r = integrate_with_breaks(&step, -1.0, 1.0, &[0.3], &opts);
        assert!((r.value - 1.3).abs() < 1e-12);
    }

    #[test]
    fn legendre_rules() {
        for n in [1usize, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((v - 1.0 / (deg + 1) as f64).abs() < 1e-13, "n={n}");
        }
    }
}
