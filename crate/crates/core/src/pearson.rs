//! Stein's density approach for centered laws: the map between a density and
//! its `tau` function, the solution of the Stein equation
//! `tau(x) f'(x) - x f(x) = h(x) - E h(Z)`, and quadratic `tau` (Pearson)
//! classification.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_singular, integrate_with_breaks, QuadOptions};

/// Tolerance for the centering and normalization checks.
pub const MOMENT_TOLERANCE: f64 = 1e-8;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `tau(x) = alpha x^2 + beta x + gamma` on `(a, b)`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_bound")]
    pub a: f64,
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_bound")]
    pub b: f64,
}

fn ser_bound<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *v == f64::INFINITY {
        s.serialize_str("inf")
    } else if *v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_bound<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Bound {
        Num(f64),
        Text(String),
    }
    match Bound::deserialize(d)? {
        Bound::Num(v) => Ok(v),
        Bound::Text(t) => match t.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" | "−inf" => Ok(f64::NEG_INFINITY),
            other => Err(serde::de::Error::custom(format!("bad support endpoint {other:?}"))),
        },
    }
}

impl PearsonSpec {
    /// Validates the support and sign conditions on `tau`.
    pub fn new(alpha: f64, beta: f64, gamma: f64, a: f64, b: f64) -> Result<Self> {
        let s = PearsonSpec { alpha, beta, gamma, a, b };
        s.validate()?;
        Ok(s)
    }

    /// Standard normal: `tau = 1` on the line.
    pub fn normal() -> Self {
        PearsonSpec {
            alpha: 0.0,
            beta: 0.0,
            gamma: 1.0,
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }

    /// Centered Gamma `2G(nu/2) - nu`: `tau = 2(x + nu)` on `(-nu, inf)`.
    pub fn centered_gamma(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
        }
        Ok(PearsonSpec {
            alpha: 0.0,
            beta: 2.0,
            gamma: 2.0 * nu,
            a: -nu,
            b: f64::INFINITY,
        })
    }

    /// Uniform on `(-1, 1)`: `tau = (1 - x^2)/2`.
    pub fn uniform() -> Self {
        PearsonSpec {
            alpha: -0.5,
            beta: 0.0,
            gamma: 0.5,
            a: -1.0,
            b: 1.0,
        }
    }

    fn poly(&self, x: f64) -> f64 {
        (self.alpha * x + self.beta) * x + self.gamma
    }

    pub fn tau(&self, x: f64) -> f64 {
        if x > self.a && x < self.b {
            self.poly(x).max(0.0)
        } else {
            0.0
        }
    }

    /// An antiderivative of `y / tau(y)` valid inside the support.
    fn exponent_primitive(&self, y: f64) -> f64 {
        let (al, be, ga) = (self.alpha, self.beta, self.gamma);
        if al == 0.0 {
            if be == 0.0 {
                return y * y / (2.0 * ga);
            }
            return y / be - ga / (be * be) * (be * y + ga).abs().ln();
        }
        let disc = be * be - 4.0 * al * ga;
        let lin = 2.0 * al * y + be;
        // int dy / tau
        let inv = if disc < 0.0 {
            let s = (-disc).sqrt();
            2.0 / s * (lin / s).atan()
        } else if disc > 0.0 {
            let s = disc.sqrt();
            ((lin - s) / (lin + s)).abs().ln() / s
        } else {
            -2.0 / lin
        };
        self.poly(y).abs().ln() / (2.0 * al) - be / (2.0 * al) * inv
    }

    /// `int_x^y z / tau(z) dz` in closed form, for `x, y` inside the support.
    pub fn exponent(&self, x: f64, y: f64) -> f64 {
        self.exponent_primitive(y) - self.exponent_primitive(x)
    }

    fn scale(&self) -> f64 {
        self.alpha.abs() + self.beta.abs() + self.gamma.abs()
    }

    /// Support, positivity, endpoint zeros, and divergence of
    /// `int_0^b y/tau` and `int_a^0 y/tau`.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.a, self.b);
        if [self.alpha, self.beta, self.gamma].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tau coefficients must be finite".into()));
        }
        if a.is_nan() || b.is_nan() || !(a < 0.0 && 0.0 < b) {
            return Err(Error::SupportError(format!("need a < 0 < b, got ({a}, {b})")));
        }
        let tol = 1e-12 * self.scale().max(1.0);
        for end in [a, b] {
            if end.is_finite() && self.poly(end).abs() > tol * (1.0 + end * end) {
                return Err(Error::NonUniqueness(format!(
                    "tau({end}) = {} must vanish at a finite endpoint",
                    self.poly(end)
                )));
            }
        }
        // positivity: check 0, the vertex, and a coarse interior sweep
        let mut probes = vec![0.0];
        if self.alpha != 0.0 {
            probes.push(-self.beta / (2.0 * self.alpha));
        }
        let (lo, hi) = (a.max(-1e6), b.min(1e6));
        for k in 1..200 {
            probes.push(lo + (hi - lo) * k as f64 / 200.0);
        }
        for x in probes {
            if x > a && x < b && self.poly(x) <= 0.0 {
                return Err(Error::SupportError(format!("tau({x}) = {} <= 0 inside the support", self.poly(x))));
            }
        }
        // infinite ends: tau must not grow faster than quadratically with a
        // negative sign, and y/tau must not be integrable there
        for (end, sign) in [(a, -1.0), (b, 1.0)] {
            if end.is_infinite() && (self.alpha < 0.0 || (self.alpha == 0.0 && self.beta * sign < 0.0)) {
                return Err(Error::SupportError(format!(
                    "tau becomes negative towards {}",
                    if sign > 0.0 { "+inf" } else { "-inf" }
                )));
            }
        }
        // With tau > 0 inside, a zero at a finite endpoint makes y/tau
        // non-integrable there, and at infinity y/tau ~ 1/(alpha y), 1/beta or
        // y/gamma; all diverge with the right sign.
        Ok(())
    }

    /// Logarithmic-derivative coefficients of the density.
    pub fn classify(&self) -> PearsonClassification {
        pearson_classify(self)
    }
}

/// `p'(x)/p(x) = (a0 + a1 x) / (b0 + b1 x + b2 x^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl OdeCoefficients {
    pub fn log_derivative(&self, x: f64) -> f64 {
        (self.a0 + self.a1 * x) / (self.b0 + self.b1 * x + self.b2 * x * x)
    }
}

/// Both sign conventions: `derived` is forced by `tau p = int_x^inf y p`;
/// `printed` has numerator signs flipped (`a0 = beta`, `a1 = 2 alpha + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonClassification {
    pub derived: OdeCoefficients,
    pub printed: OdeCoefficients,
}

/// Differentiating `tau p = int_x^b y p(y) dy` gives
/// `p'/p = -(beta + (2 alpha + 1) x) / (alpha x^2 + beta x + gamma)`.
pub fn pearson_classify(spec: &PearsonSpec) -> PearsonClassification {
    let (al, be, ga) = (spec.alpha, spec.beta, spec.gamma);
    PearsonClassification {
        derived: OdeCoefficients {
            a0: -be,
            a1: -(2.0 * al + 1.0),
            b0: ga,
            b1: be,
            b2: al,
        },
        printed: OdeCoefficients {
            a0: be,
            a1: 2.0 * al + 1.0,
            b0: ga,
            b1: be,
            b2: al,
        },
    }
}

/// A `tau` function with its support.
#[derive(Clone)]
pub struct Tau {
    f: RealFn,
    a: f64,
    b: f64,
    spec: Option<PearsonSpec>,
}

impl fmt::Debug for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tau")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("spec", &self.spec)
            .finish()
    }
}

impl Tau {
    pub fn from_spec(spec: &PearsonSpec) -> Result<Self> {
        spec.validate()?;
        let s = *spec;
        Ok(Tau {
            f: Arc::new(move |x| s.tau(x)),
            a: spec.a,
            b: spec.b,
            spec: Some(*spec),
        })
    }

    /// A general `tau`; the divergence conditions are checked heuristically
    /// by [`density_from_tau`].
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::SupportError(format!("need a < 0 < b, got ({a}, {b})")));
        }
        Ok(Tau {
            f: Arc::new(f),
            a,
            b,
            spec: None,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.a && x < self.b {
            (self.f)(x)
        } else {
            0.0
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn spec(&self) -> Option<&PearsonSpec> {
        self.spec.as_ref()
    }

    /// `int_x^y z / tau(z) dz` for `x, y` inside the support.
    pub fn exponent(&self, x: f64, y: f64) -> f64 {
        if let Some(spec) = &self.spec {
            return spec.exponent(x, y);
        }
        self.exponent_by_quadrature(x, y)
    }

    pub fn exponent_by_quadrature(&self, x: f64, y: f64) -> f64 {
        let g = |z: f64| z / self.eval(z);
        integrate(&g, x, y, &QuadOptions::default()).value
    }

    /// Checks `int_0^b y/tau = +inf` and `int_a^0 y/tau = -inf` by probing
    /// geometrically refined shells towards each end: the exponent
    /// `int_0^x y/tau` must keep growing by non-vanishing increments.
    fn check_explosion(&self) -> Result<()> {
        for (end, sign) in [(self.b, 1.0), (self.a, -1.0)] {
            let probe = |k: i32| -> f64 {
                if end.is_finite() {
                    end * (1.0 - 2f64.powi(-k))
                } else {
                    sign * 2f64.powi(k)
                }
            };
            let mut incs = Vec::new();
            for k in 1..=24 {
                let inc = self.exponent(probe(k), probe(k + 1));
                incs.push(inc);
            }
            let n = incs.len();
            let tail = &incs[n - 4..];
            let grows = tail.iter().all(|v| *v > 0.0 && v.is_finite())
                && tail[3] >= 0.5 * tail[0];
            if !grows && incs.iter().all(|v| v.is_finite()) {
                return Err(Error::NonUniqueness(format!(
                    "int y/tau(y) appears to converge towards {end} (last increments {tail:?})"
                )));
            }
        }
        Ok(())
    }
}

/// Anything with a density on an interval.
pub trait Density: Send + Sync {
    fn pdf(&self, x: f64) -> f64;
    fn support(&self) -> (f64, f64);
}

/// Density given in closed form.
#[derive(Clone)]
pub struct ClosedFormDensity {
    pdf: RealFn,
    a: f64,
    b: f64,
}

impl ClosedFormDensity {
    pub fn new(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, a: f64, b: f64) -> Self {
        ClosedFormDensity { pdf: Arc::new(pdf), a, b }
    }

    pub fn standard_normal() -> Self {
        let c = (2.0 * std::f64::consts::PI).sqrt();
        Self::new(move |x| (-0.5 * x * x).exp() / c, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Law of `2G - nu` with `G ~ Gamma(nu/2, 1)`.
    pub fn centered_gamma(nu: f64) -> Self {
        let k = 0.5 * nu;
        let log_norm = k * 2f64.ln() + ln_gamma(k);
        Self::new(
            move |x| {
                let y = x + nu;
                if y <= 0.0 {
                    0.0
                } else {
                    ((k - 1.0) * y.ln() - 0.5 * y - log_norm).exp()
                }
            },
            -nu,
            f64::INFINITY,
        )
    }

    pub fn uniform() -> Self {
        Self::new(|x: f64| if x.abs() < 1.0 { 0.5 } else { 0.0 }, -1.0, 1.0)
    }
}

impl Density for ClosedFormDensity {
    fn pdf(&self, x: f64) -> f64 {
        if x > self.a && x < self.b {
            (self.pdf)(x)
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}

/// `tau(x) = int_x^b y p(y) dy / p(x)` on the support, zero outside.
///
/// For `x < 0` the equivalent `-int_a^x y p / p(x)` avoids cancellation.
pub fn tau_from_density(p: Arc<dyn Density>) -> Result<Tau> {
    let (a, b) = p.support();
    if !(a < 0.0 && 0.0 < b) {
        return Err(Error::SupportError(format!("need a < 0 < b, got ({a}, {b})")));
    }
    let opts = QuadOptions::default();
    let mass = integrate_singular(&|x| p.pdf(x), a, b, &opts).value;
    if (mass - 1.0).abs() > MOMENT_TOLERANCE {
        return Err(Error::SupportError(format!("density integrates to {mass}")));
    }
    let mean = integrate_singular(&|x| x * p.pdf(x), a, b, &opts).value;
    if mean.abs() > MOMENT_TOLERANCE {
        return Err(Error::CenteringError(mean));
    }
    for x in interior_probes(a, b, 101) {
        let v = p.pdf(x);
        if !(v > 0.0) {
            return Err(Error::SupportError(format!("density is {v} at interior point {x}")));
        }
    }
    let q = p.clone();
    let f = move |x: f64| {
        let px = q.pdf(x);
        if !(px > 0.0) {
            return 0.0;
        }
        let g = |y: f64| y * q.pdf(y);
        let opts = QuadOptions::relative(1e-11);
        let num = if x >= 0.0 {
            integrate_singular(&g, x, b, &opts).value
        } else {
            -integrate_singular(&g, a, x, &opts).value
        };
        num / px
    };
    Tau::custom(f, a, b)
}

fn interior_probes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let lo = if a.is_finite() { a } else { -8.0 };
    let hi = if b.is_finite() { b } else { 8.0 };
    (1..n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Density rebuilt from `tau`:
/// `p(x) = exp(-int_0^x y/tau(y) dy) / (C tau(x))` on `(a, b)`.
#[derive(Clone, Debug)]
pub struct DensityModel {
    tau: Tau,
    normalization: f64,
}

impl DensityModel {
    pub fn tau(&self) -> &Tau {
        &self.tau
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `exp(-int_0^x y/tau) / tau(x)`, without the constant.
    fn kernel(&self, x: f64) -> f64 {
        let t = self.tau.eval(x);
        if !(t > 0.0) {
            return 0.0;
        }
        (-self.tau.exponent(0.0, x)).exp() / t
    }

    /// `E[h(Z)]`, splitting the integral at the given discontinuities.
    pub fn expect(&self, h: &dyn Fn(f64) -> f64, breaks: &[f64]) -> Result<f64> {
        let (a, b) = self.tau.support();
        let g = |x: f64| h(x) * self.pdf(x);
        integrate_with_breaks(&g, a, b, breaks, &QuadOptions::default()).checked(1e-9, "expectation")
    }

    pub fn moment(&self, k: i32) -> Result<f64> {
        self.expect(&|x| x.powi(k), &[])
    }

    /// `P(Z > x)`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let (a, b) = self.tau.support();
        let x = x.max(a);
        integrate_singular(&|y| self.pdf(y), x, b, &QuadOptions::relative(1e-10)).value
    }

    /// An interval outside of which the mass is below `eps` on each side.
    pub fn effective_support(&self, eps: f64) -> (f64, f64) {
        let (a, b) = self.tau.support();
        let mut lo = a;
        if !a.is_finite() {
            lo = -1.0;
            while 1.0 - self.upper_tail(lo) > eps && lo > -1e6 {
                lo *= 1.5;
            }
        }
        let mut hi = b;
        if !b.is_finite() {
            hi = 1.0;
            while self.upper_tail(hi) > eps && hi < 1e6 {
                hi *= 1.5;
            }
        }
        (lo, hi)
    }
}

impl Density for DensityModel {
    fn pdf(&self, x: f64) -> f64 {
        self.kernel(x) / self.normalization
    }

    fn support(&self) -> (f64, f64) {
        self.tau.support()
    }
}

/// Builds the density attached to `tau`, after checking the divergence
/// conditions that make it unique (analytically for quadratic `tau`).
pub fn density_from_tau(tau: &Tau) -> Result<DensityModel> {
    match tau.spec() {
        Some(spec) => spec.validate()?,
        None => tau.check_explosion()?,
    }
    let (a, b) = tau.support();
    let mut model = DensityModel {
        tau: tau.clone(),
        normalization: 1.0,
    };
    let c = integrate_singular(&|x| model.kernel(x), a, b, &QuadOptions::default()).checked(1e-9, "normalization")?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::NonUniqueness(format!("normalizing constant {c}")));
    }
    model.normalization = c;
    let mean = model.moment(1)?;
    if mean.abs() > MOMENT_TOLERANCE {
        return Err(Error::CenteringError(mean));
    }
    Ok(model)
}

/// The bounded solution `U_tau h` of `tau f' - x f = h - E h(Z)`.
#[derive(Clone)]
pub struct SteinSolution {
    density: Arc<DensityModel>,
    h: RealFn,
    breaks: Vec<f64>,
    mean_h: f64,
}

impl fmt::Debug for SteinSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SteinSolution")
            .field("tau", self.density.tau())
            .field("mean_h", &self.mean_h)
            .field("breaks", &self.breaks)
            .finish()
    }
}

/// Solves the Stein equation for a bounded, piecewise continuous `h` whose
/// discontinuities are listed in `breaks`.
pub fn stein_solve(
    density: &Arc<DensityModel>,
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    breaks: &[f64],
) -> Result<SteinSolution> {
    let h: RealFn = Arc::new(h);
    let mean_h = density.expect(&|x| h(x), breaks)?;
    Ok(SteinSolution {
        density: density.clone(),
        h,
        breaks: breaks.to_vec(),
        mean_h,
    })
}

impl SteinSolution {
    pub fn density(&self) -> &Arc<DensityModel> {
        &self.density
    }

    pub fn mean_h(&self) -> f64 {
        self.mean_h
    }

    pub fn h(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    pub fn tau(&self, x: f64) -> f64 {
        self.density.tau().eval(x)
    }

    /// `U_tau h(x)`. Inside the support:
    /// `int_a^x (h(y) - Eh) exp(int_y^x z/tau) / tau(y) dy`, evaluated as
    /// the equal upper-tail integral for `x > 0` so exponents stay negative.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let tau = self.density.tau();
        let (a, b) = tau.support();
        if !(x > a && x < b) {
            return Ok((self.h(x) - self.mean_h) / x);
        }
        let g = |y: f64| {
            let t = tau.eval(y);
            if !(t > 0.0) {
                return 0.0;
            }
            // exp(int_y^x z/tau) = exp(-int_x^y z/tau)
            (self.h(y) - self.mean_h) * (-tau.exponent(x, y)).exp() / t
        };
        let opts = QuadOptions::relative(1e-10);
        let r = if x <= 0.0 {
            integrate_with_breaks(&g, a, x, &self.breaks, &opts)
        } else {
            let mut r = integrate_with_breaks(&g, x, b, &self.breaks, &opts);
            r.value = -r.value;
            r
        };
        // absolute scale of U is O(sup|h|)
        if !r.value.is_finite() || r.error > 1e-7 * r.value.abs().max(1e-3) {
            return Err(Error::Accuracy(format!(
                "Stein solution at x = {x}: value {:.6e}, error estimate {:.3e}, {} subintervals",
                r.value, r.error, r.intervals
            )));
        }
        Ok(r.value)
    }

    /// `U'(x)`: from the equation itself inside the support, from
    /// differentiating `(h - Eh)/x` (numerically in `h`) outside.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let t = self.tau(x);
        if t > 0.0 {
            return Ok((x * self.eval(x)? + self.h(x) - self.mean_h) / t);
        }
        let e = 1e-6 * x.abs().max(1.0);
        let dh = (self.h(x + e) - self.h(x - e)) / (2.0 * e);
        Ok((dh * x - (self.h(x) - self.mean_h)) / (x * x))
    }

    /// `tau U' - x U - (h - Eh)` with `U'` from a central difference of `U`.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let e = 1e-5 * x.abs().max(1.0);
        let du = (self.eval(x + e)? - self.eval(x - e)?) / (2.0 * e);
        Ok(self.tau(x) * du - x * self.eval(x)? - (self.h(x) - self.mean_h))
    }

    /// `U` sampled on a uniform grid over `[lo, hi]`, for fast repeated use.
    pub fn tabulate(&self, lo: f64, hi: f64, points: usize) -> Result<TabulatedSolution> {
        let xs: Vec<f64> = (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect();
        let us = xs.iter().map(|&x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(TabulatedSolution {
            sol: self.clone(),
            lo,
            hi,
            us,
        })
    }
}

/// Linear interpolation of `U` on a grid, with exact evaluation off-grid.
#[derive(Debug, Clone)]
pub struct TabulatedSolution {
    sol: SteinSolution,
    lo: f64,
    hi: f64,
    us: Vec<f64>,
}

impl TabulatedSolution {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = self.sol.density.tau().support();
        if !(x > a && x < b) || x < self.lo || x > self.hi {
            return self.sol.eval(x);
        }
        let n = self.us.len() - 1;
        let pos = (x - self.lo) / (self.hi - self.lo) * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let t = pos - k as f64;
        Ok(self.us[k] * (1.0 - t) + self.us[k + 1] * t)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        let t = self.sol.tau(x);
        if t > 0.0 {
            return Ok((x * self.eval(x)? + self.sol.h(x) - self.sol.mean_h) / t);
        }
        self.sol.derivative(x)
    }

    pub fn solution(&self) -> &SteinSolution {
        &self.sol
    }
}

/// Grid suprema behind the two uniform solution bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinBoundCheck {
    pub sup_x_u: f64,
    pub sup_tau_du: f64,
    /// `sup [|xU| + |tau U'|]` over the interior grid points.
    pub sup_sum_inside: f64,
    /// Same over the whole grid, including points outside the support.
    pub sup_sum: f64,
    pub sup_h_inside: f64,
    pub sup_h: f64,
    /// `2 max{3, 1/|a|, 1/|b|}`.
    pub k_constant: f64,
    pub pass6: bool,
    pub pass_k: bool,
}

/// `K = 2 max{3, 1/|a|, 1/|b|}` with `1/inf = 0`.
pub fn stein_k_constant(a: f64, b: f64) -> f64 {
    let inv = |v: f64| if v.is_finite() { 1.0 / v.abs() } else { 0.0 };
    2.0 * 3f64.max(inv(a)).max(inv(b))
}

/// Evaluates both bounds on `grid`.
pub fn stein_bound_check(sol: &SteinSolution, grid: &[f64]) -> Result<SteinBoundCheck> {
    let (a, b) = sol.density.tau().support();
    let mut out = SteinBoundCheck {
        sup_x_u: 0.0,
        sup_tau_du: 0.0,
        sup_sum_inside: 0.0,
        sup_sum: 0.0,
        sup_h_inside: 0.0,
        sup_h: 0.0,
        k_constant: stein_k_constant(a, b),
        pass6: true,
        pass_k: true,
    };
    for &x in grid {
        let u = sol.eval(x)?;
        let t = sol.tau(x);
        let tdu = if t > 0.0 { t * sol.derivative(x)? } else { 0.0 };
        let xu = (x * u).abs();
        let sum = xu + tdu.abs();
        let hx = sol.h(x).abs();
        out.sup_sum = out.sup_sum.max(sum);
        out.sup_h = out.sup_h.max(hx);
        if x > a && x < b {
            out.sup_x_u = out.sup_x_u.max(xu);
            out.sup_tau_du = out.sup_tau_du.max(tdu.abs());
            out.sup_sum_inside = out.sup_sum_inside.max(sum);
            out.sup_h_inside = out.sup_h_inside.max(hx);
        }
    }
    let slack = 1e-9;
    out.pass6 = out.sup_sum_inside <= 6.0 * out.sup_h_inside + slack;
    out.pass_k = out.sup_sum <= out.k_constant * out.sup_h + slack;
    Ok(out)
}

/// A grid over the effective support, avoiding the endpoints themselves.
pub fn interior_grid(density: &DensityModel, points: usize) -> Vec<f64> {
    let (lo, hi) = density.effective_support(1e-10);
    let (a, b) = density.tau().support();
    let inset = 1e-4 * (hi - lo);
    let lo = if a.is_finite() { a + inset } else { lo };
    let hi = if b.is_finite() { b - inset } else { hi };
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// `E[tau(Z) f'(Z) - Z f(Z)]` under the density attached to `tau`.
pub fn char_residual(
    density: &DensityModel,
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let tau = density.tau();
    let abs_part = density.expect(&|x| (tau.eval(x) * df(x)).abs(), &[])?;
    if !abs_part.is_finite() {
        return Err(Error::Integrability("E|tau(Z) f'(Z)| is not finite".into()));
    }
    density.expect(&|x| tau.eval(x) * df(x) - x * f(x), &[])
}
