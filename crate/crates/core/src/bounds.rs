//! Closed-form Stein–Malliavin distance bounds for Gaussian and centered
//! Gamma targets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chaos::{malliavin_inner, ChaosVector};
use crate::combin::{binomial, factorial};
use crate::error::{Error, Result};
use crate::tensor::{contract, contract_sym, SymKernel};

/// Probability metric a bound is stated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Kolmogorov,
    TotalVariation,
    Wasserstein,
    FortetMourier,
    H1,
    H2,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::Kolmogorov => "Kolmogorov",
            Metric::TotalVariation => "TotalVariation",
            Metric::Wasserstein => "Wasserstein",
            Metric::FortetMourier => "FortetMourier",
            Metric::H1 => "H1",
            Metric::H2 => "H2",
        }
    }

    /// Constant in front of `E[(1 - <DF,-DL^{-1}F>)^2]^{1/2}` for a
    /// standard normal target.
    pub fn gaussian_constant(self) -> Result<f64> {
        match self {
            Metric::Kolmogorov | Metric::Wasserstein => Ok(1.0),
            Metric::TotalVariation => Ok(2.0),
            Metric::FortetMourier => Ok(4.0),
            Metric::H1 | Metric::H2 => Err(Error::InvalidParameter(format!(
                "metric {} applies to Gamma targets only",
                self.label()
            ))),
        }
    }

    /// `K1` or `K2` for a centered Gamma target with parameter `nu`.
    pub fn gamma_constant(self, nu: f64) -> Result<f64> {
        let (k1, k2) = stein_constants(nu)?;
        match self {
            Metric::H2 => Ok(k2),
            Metric::H1 => k1.ok_or_else(|| {
                Error::InvalidParameter(format!("metric H1 requires an integer nu, got {nu}"))
            }),
            _ => Err(Error::InvalidParameter(format!(
                "metric {} applies to Gaussian targets only",
                self.label()
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "kolmogorov" | "kol" => Ok(Metric::Kolmogorov),
            "totalvariation" | "tv" => Ok(Metric::TotalVariation),
            "wasserstein" | "w" | "w1" => Ok(Metric::Wasserstein),
            "fortetmourier" | "fm" => Ok(Metric::FortetMourier),
            "h1" => Ok(Metric::H1),
            "h2" => Ok(Metric::H2),
            _ => Err(Error::InvalidParameter(format!("unknown metric {s:?}"))),
        }
    }
}

/// One contraction contribution to a squared bound. For single-kernel
/// bounds `i = j = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionTerm {
    pub i: usize,
    pub j: usize,
    pub r: usize,
    pub value: f64,
}

/// A bound split into its variance and contraction parts.
///
/// `bound = metric_constant * sqrt(squared_total)` and
/// `squared_total = variance_term + sum(contraction_terms)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub metric: Metric,
    pub variance_term: f64,
    pub contraction_terms: Vec<ContractionTerm>,
    pub squared_total: f64,
    pub metric_constant: f64,
    pub bound: f64,
    /// The exact value of the squared quantity when it is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_total: Option<f64>,
    /// The looser unsymmetrized-contraction form, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_total: Option<f64>,
}

impl BoundReport {
    fn assemble(metric: Metric, constant: f64, variance_term: f64, terms: Vec<ContractionTerm>) -> Self {
        let squared_total = variance_term + terms.iter().map(|t| t.value).sum::<f64>();
        BoundReport {
            metric,
            variance_term,
            contraction_terms: terms,
            squared_total,
            metric_constant: constant,
            bound: constant * squared_total.max(0.0).sqrt(),
            exact_total: None,
            upper_total: None,
        }
    }

    pub fn contraction_sum(&self) -> f64 {
        self.contraction_terms.iter().map(|t| t.value).sum()
    }

    pub const CSV_HEADER: [&'static str; 4] = ["metric", "variance_term", "squared_total", "bound"];
}

fn check_single(f: &SymKernel, q: usize, min: usize) -> Result<()> {
    if f.order() != q {
        return Err(Error::InvalidOrder(format!(
            "declared order {q} but kernel has order {}",
            f.order()
        )));
    }
    if q < min {
        return Err(Error::InvalidOrder(format!("chaos order {q} < {min}")));
    }
    Ok(())
}

/// `E[(1 - q^{-1}||DF||^2)^2]` for `F = I_q(f)`, computed as
/// `(1 - q!||f||^2)^2 + q^2 sum_{r<q} (2q-2r)! (r-1)!^2 C(q-1,r-1)^4 ||f ⊗~_r f||^2`.
///
/// This is an equality; `upper_total` carries the same sum with
/// unsymmetrized contractions.
pub fn gauss_bound_single(f: &SymKernel, q: usize, metric: Metric) -> Result<BoundReport> {
    check_single(f, q, 2)?;
    let constant = metric.gaussian_constant()?;
    let variance = (1.0 - factorial(q) * f.norm_sq()).powi(2);
    let mut terms = Vec::with_capacity(q - 1);
    let mut upper = variance;
    for r in 1..q {
        let w = (q * q) as f64
            * factorial(2 * q - 2 * r)
            * factorial(r - 1).powi(2)
            * binomial(q - 1, r - 1).powi(4);
        let raw = contract(f, f, r)?;
        let sym = crate::tensor::symmetrize(&raw);
        terms.push(ContractionTerm {
            i: 0,
            j: 0,
            r,
            value: w * sym.norm_sq(),
        });
        upper += w * raw.norm_sq();
    }
    let mut rep = BoundReport::assemble(metric, constant, variance, terms);
    rep.exact_total = Some(rep.squared_total);
    rep.upper_total = Some(upper);
    Ok(rep)
}

/// Upper bound on `E[(1 - <DZ,-DL^{-1}Z>)^2]` for `Z = sum_i I_{q_i}(f_i)`:
/// `2(1 - sum q_i!||f_i||^2)^2 + 2s^2 sum_{(i,j,r)} w_{ijr}
///  ||f_i ⊗_{q_i-r} f_i|| ||f_j ⊗_{q_j-r} f_j||`, where the index set skips
/// `r = q_i = q_j`.
pub fn gauss_bound_sum(terms: &[(usize, SymKernel)], metric: Metric) -> Result<BoundReport> {
    let constant = metric.gaussian_constant()?;
    if terms.is_empty() {
        return Err(Error::InvalidParameter("gauss_bound_sum needs at least one term".into()));
    }
    for (k, (q, f)) in terms.iter().enumerate() {
        check_single(f, *q, 2)?;
        if k > 0 && terms[k - 1].0 >= *q {
            return Err(Error::InvalidOrder(format!(
                "orders must be strictly increasing, got {} then {q}",
                terms[k - 1].0
            )));
        }
        if !f.space().same_as(terms[0].1.space()) {
            return Err(Error::SpaceMismatch);
        }
    }
    let s = terms.len() as f64;
    let mass: f64 = terms.iter().map(|(q, f)| factorial(*q) * f.norm_sq()).sum();
    let variance = 2.0 * (1.0 - mass).powi(2);
    // norms[i][r-1] = ||f_i ⊗_{q_i - r} f_i||, r = 1..=q_i
    let mut norms = Vec::with_capacity(terms.len());
    for (q, f) in terms {
        let mut row = Vec::with_capacity(*q);
        for r in 1..=*q {
            row.push(contract(f, f, q - r)?.norm());
        }
        norms.push(row);
    }
    let mut out = Vec::new();
    for (i, (qi, _)) in terms.iter().enumerate() {
        for (j, (qj, _)) in terms.iter().enumerate() {
            let (qi, qj) = (*qi, *qj);
            for r in 1..=qi.min(qj) {
                if r == qi && qi == qj {
                    continue;
                }
                let w = (qi * qi) as f64
                    * factorial(r - 1).powi(2)
                    * binomial(qi - 1, r - 1).powi(2)
                    * binomial(qj - 1, r - 1).powi(2)
                    * factorial(qi + qj - 2 * r);
                out.push(ContractionTerm {
                    i,
                    j,
                    r,
                    value: 2.0 * s * s * w * norms[i][r - 1] * norms[j][r - 1],
                });
            }
        }
    }
    Ok(BoundReport::assemble(metric, constant, variance, out))
}

/// Interior of the second-chaos normal bound: equals `E[(1 - ½||DZ||^2)^2]`
/// for `Z` in the second chaos with moments `m2`, `m4`.
pub fn second_chaos_gauss_interior(m2: f64, m4: f64) -> f64 {
    (m4 - 3.0) / 6.0 + (m2 - 1.0) * (0.5 * m2 - 1.5)
}

/// Total-variation bound from the second and fourth moments of a
/// second-chaos variable.
pub fn second_chaos_gauss_bound(m2: f64, m4: f64) -> Result<f64> {
    if !(m2 > 0.0) {
        return Err(Error::InvalidParameter(format!("second moment {m2} must be > 0")));
    }
    let inner = (m4 - 3.0).abs() / 6.0 + (3.0 + m2) / 2.0 * (m2 - 1.0).abs();
    Ok(2.0 * inner.sqrt())
}

/// Interior of the second-chaos Gamma bound: equals
/// `E[(2Z + 2nu - ½||DZ||^2)^2]` for `Z` in the second chaos.
pub fn second_chaos_gamma_interior(nu: f64, m2: f64, m3: f64, m4: f64) -> f64 {
    (m2 - 2.0 * nu) * (4.0 - 3.0 * nu + 0.5 * m2)
        + (m4 - 12.0 * m3 - 12.0 * nu * nu + 48.0 * nu) / 6.0
}

/// Bound in the `H2` distance between a second-chaos variable with moments
/// `m2, m3, m4` and the centered Gamma law with parameter `nu`. The leading
/// constant is `max{1, 1/nu, 2/nu^2}`.
pub fn second_chaos_gamma_bound(nu: f64, m2: f64, m3: f64, m4: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be > 0")));
    }
    let k = 1f64.max(1.0 / nu).max(2.0 / (nu * nu));
    let inner = (m4 - 12.0 * m3 - 12.0 * nu * nu + 48.0 * nu).abs() / 6.0
        + (8.0 - 6.0 * nu + m2).abs() / 2.0 * (m2 - 2.0 * nu).abs();
    Ok(k * inner.sqrt())
}

/// `c_q = 1 / ((q/2)! C(q-1, q/2-1)^2)` for even `q`.
pub fn c_q(q: usize) -> f64 {
    1.0 / (factorial(q / 2) * binomial(q - 1, q / 2 - 1).powi(2))
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("nu = {nu} must be a finite positive number")))
    }
}

/// `E[(2nu + 2G - q^{-1}||DG||^2)^2]` for `G = I_q(g)`, `q` even:
/// `(2nu - q!||g||^2)^2 + q^2 sum_{r != q/2} (2q-2r)!(r-1)!^2 C(q-1,r-1)^4 ||g ⊗_r g||^2
///  + 4q! ||c_q^{-1} g ⊗~_{q/2} g - g||^2`.
///
/// `squared_total` uses symmetrized contractions (an equality); the form
/// with unsymmetrized `g ⊗_r g` goes to `upper_total`.
pub fn gamma_bound_single(g: &SymKernel, q: usize, nu: f64, metric: Metric) -> Result<BoundReport> {
    check_single(g, q, 2)?;
    if q % 2 == 1 {
        return Err(Error::InvalidOrder(format!("Gamma bounds need an even chaos order, got {q}")));
    }
    check_nu(nu)?;
    let constant = metric.gamma_constant(nu)?;
    let variance = (2.0 * nu - factorial(q) * g.norm_sq()).powi(2);
    let mut terms = Vec::with_capacity(q - 1);
    let mut upper = variance;
    for r in 1..q {
        let value;
        if 2 * r == q {
            let diff = contract_sym(g, g, r)?.scaled(1.0 / c_q(q)).axpy(-1.0, g)?;
            value = 4.0 * factorial(q) * diff.norm_sq();
            upper += value;
        } else {
            let w = (q * q) as f64
                * factorial(2 * q - 2 * r)
                * factorial(r - 1).powi(2)
                * binomial(q - 1, r - 1).powi(4);
            let raw = contract(g, g, r)?;
            value = w * crate::tensor::symmetrize(&raw).norm_sq();
            upper += w * raw.norm_sq();
        }
        terms.push(ContractionTerm { i: 0, j: 0, r, value });
    }
    let mut rep = BoundReport::assemble(metric, constant, variance, terms);
    rep.exact_total = Some(rep.squared_total);
    rep.upper_total = Some(upper);
    Ok(rep)
}

/// Upper bound on `E[(2Z + 2nu - <DZ,-DL^{-1}Z>)^2]` for
/// `Z = I_{q1}(f1) + I_{q2}(f2)`, `nu = nu1 + nu2`, even `q1 < q2` with
/// `q2 > 2 q1`.
pub fn gamma_bound_sum(
    f1: &SymKernel,
    q1: usize,
    nu1: f64,
    f2: &SymKernel,
    q2: usize,
    nu2: f64,
    metric: Metric,
) -> Result<BoundReport> {
    check_single(f1, q1, 2)?;
    check_single(f2, q2, 2)?;
    if q1 % 2 == 1 || q2 % 2 == 1 {
        return Err(Error::InvalidOrder(format!("orders must be even, got {q1} and {q2}")));
    }
    if q1 >= q2 {
        return Err(Error::InvalidOrder(format!("need q1 < q2, got {q1} and {q2}")));
    }
    if q2 <= 2 * q1 {
        return Err(Error::InvalidOrder(format!("need q2 > 2 q1, got {q1} and {q2}")));
    }
    check_nu(nu1)?;
    check_nu(nu2)?;
    if !f1.space().same_as(f2.space()) {
        return Err(Error::SpaceMismatch);
    }
    let nu = nu1 + nu2;
    let constant = metric.gamma_constant(nu)?;
    let fs = [(q1, f1), (q2, f2)];
    let mass: f64 = fs.iter().map(|(q, f)| factorial(*q) * f.norm_sq()).sum();
    let variance = 3.0 * (2.0 * nu - mass).powi(2);
    let mut out = Vec::new();
    for (i, (q, f)) in fs.iter().enumerate() {
        let c = c_q(*q);
        let diff = contract_sym(f, f, q / 2)?.axpy(-c, f)?;
        out.push(ContractionTerm {
            i,
            j: i,
            r: q / 2,
            value: 24.0 / (c * c) * factorial(*q) * diff.norm_sq(),
        });
    }
    let mut norms = Vec::with_capacity(2);
    for (q, f) in &fs {
        let mut row = Vec::with_capacity(*q);
        for r in 1..=*q {
            row.push(contract(f, f, q - r)?.norm());
        }
        norms.push(row);
    }
    for (i, (qi, _)) in fs.iter().enumerate() {
        for (j, (qj, _)) in fs.iter().enumerate() {
            let (qi, qj) = (*qi, *qj);
            for r in 1..=qi.min(qj) {
                if i == j && (r == qi || 2 * r == qi) {
                    continue;
                }
                let w = (qi * qi) as f64
                    * factorial(r - 1).powi(2)
                    * binomial(qi - 1, r - 1).powi(2)
                    * binomial(qj - 1, r - 1).powi(2)
                    * factorial(qi + qj - 2 * r);
                out.push(ContractionTerm {
                    i,
                    j,
                    r,
                    value: 12.0 * w * norms[i][r - 1] * norms[j][r - 1],
                });
            }
        }
    }
    Ok(BoundReport::assemble(metric, constant, variance, out))
}

/// Two pieces of the bound for `F^2 - 1` against `N^2 - 1` with
/// `F = I_2(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2DoubleBound {
    pub contraction_part: f64,
    /// `E[(2 + 2H - <DH,-DL^{-1}H>)^2]` with `H = I_4(f ⊗~ f)`.
    pub gamma_expectation: f64,
    pub bound: f64,
}

/// `8 sqrt(2) ||f ⊗_1 f|| + sqrt(2 pi E[(2 + 2H - ¼||DH||^2)^2])`.
pub fn chi2_double_bound(f: &SymKernel) -> Result<Chi2DoubleBound> {
    if f.order() != 2 {
        return Err(Error::InvalidOrder(format!("expected a second-order kernel, got {}", f.order())));
    }
    let contraction_part = 8.0 * 2f64.sqrt() * contract(f, f, 1)?.norm();
    let h = ChaosVector::single(&contract_sym(f, f, 0)?);
    let y = h
        .scaled(2.0)
        .axpy(-1.0, &malliavin_inner(&h)?)?
        .axpy(1.0, &ChaosVector::constant(f.space(), 2.0))?;
    let gamma_expectation = y.second_moment();
    let bound = contraction_part + (2.0 * std::f64::consts::PI * gamma_expectation).sqrt();
    Ok(Chi2DoubleBound {
        contraction_part,
        gamma_expectation,
        bound,
    })
}

/// `(K1, K2)` for a centered Gamma target: `K1 = max{sqrt(2pi/nu), 1/nu + 2/nu^2}`
/// (integer `nu` only) and `K2 = max{1, 1/nu + 2/nu^2}`.
pub fn stein_constants(nu: f64) -> Result<(Option<f64>, f64)> {
    check_nu(nu)?;
    let tail = 1.0 / nu + 2.0 / (nu * nu);
    let k2 = 1f64.max(tail);
    let k1 = (nu.fract() == 0.0).then(|| (2.0 * std::f64::consts::PI / nu).sqrt().max(tail));
    Ok((k1, k2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{tensor_power, GramSpace};

    fn e(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    #[test]
    fn gauss_single_examples() {
        let s = GramSpace::identity(2);
        let f = tensor_power(&s, &e(2, 0), 2).unwrap().scaled(0.5f64.sqrt());
        let r = gauss_bound_single(&f, 2, Metric::TotalVariation).unwrap();
        assert!((r.squared_total - 2.0).abs() < 1e-12);
        assert!((r.bound - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        let f = SymKernel::from_entries(&s, 2, vec![(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let r = gauss_bound_single(&f, 2, Metric::Kolmogorov).unwrap();
        assert!((r.squared_total - 1.0).abs() < 1e-12);
        assert!((r.bound - 1.0).abs() < 1e-12);

        let z = SymKernel::zero(&s, 2);
        let r = gauss_bound_single(&z, 2, Metric::Kolmogorov).unwrap();
        assert_eq!(r.squared_total, 1.0);
        assert_eq!(r.variance_term, 1.0);

        let one = tensor_power(&s, &e(2, 0), 1).unwrap();
        assert!(gauss_bound_single(&one, 1, Metric::Kolmogorov).is_err());
        assert!(gauss_bound_single(&f, 2, Metric::H1).is_err());
    }

    #[test]
    fn gauss_sum_examples() {
        let s = GramSpace::identity(2);
        let f = tensor_power(&s, &e(2, 0), 2).unwrap().scaled(0.5f64.sqrt());
        let r = gauss_bound_sum(&[(2, f)], Metric::Kolmogorov).unwrap();
        assert!((r.squared_total - 4.0).abs() < 1e-12);

        let z2 = SymKernel::zero(&s, 2);
        let z3 = SymKernel::zero(&s, 3);
        let r = gauss_bound_sum(&[(2, z2.clone()), (3, z3)], Metric::Kolmogorov).unwrap();
        assert_eq!(r.squared_total, 2.0);
        assert!(gauss_bound_sum(&[(2, z2.clone()), (2, z2)], Metric::Kolmogorov).is_err());
    }

    #[test]
    fn second_chaos_moment_bounds() {
        assert_eq!(second_chaos_gauss_bound(1.0, 3.0).unwrap(), 0.0);
        assert!((second_chaos_gauss_bound(1.0, 3.6).unwrap() - 0.632456).abs() < 1e-6);
        assert!((second_chaos_gauss_bound(1.1, 3.6).unwrap() - 1.104536).abs() < 1e-6);
        assert!(second_chaos_gauss_bound(0.0, 3.0).is_err());

        assert!(second_chaos_gamma_bound(1.0, 2.0, 8.0, 60.0).unwrap().abs() < 1e-12);
        assert!(second_chaos_gamma_bound(2.0, 4.0, 16.0, 144.0).unwrap().abs() < 1e-12);
        assert!((second_chaos_gamma_bound(1.0, 2.0, 8.0, 66.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(second_chaos_gamma_bound(0.0, 2.0, 8.0, 60.0).is_err());
    }

    #[test]
    fn gamma_single_examples() {
        let s = GramSpace::identity(2);
        let g = tensor_power(&s, &e(2, 0), 2).unwrap();
        let r = gamma_bound_single(&g, 2, 1.0, Metric::H2).unwrap();
        assert!(r.squared_total.abs() < 1e-12);
        assert!(r.bound.abs() < 1e-12);

        let h = 0.5f64.sqrt();
        let g = SymKernel::from_entries(&s, 2, vec![(vec![0, 0], h), (vec![1, 1], h)]).unwrap();
        let r = gamma_bound_single(&g, 2, 1.0, Metric::H2).unwrap();
        let want = 8.0 * (1.0 - h).powi(2);
        assert!((r.squared_total - want).abs() < 1e-12);
        assert!((r.bound - 3.0 * want.sqrt()).abs() < 1e-12);

        let z = SymKernel::zero(&s, 2);
        let r = gamma_bound_single(&z, 2, 1.0, Metric::H2).unwrap();
        assert_eq!(r.squared_total, 4.0);
        assert_eq!(r.bound, 6.0);

        let g3 = SymKernel::zero(&s, 3);
        assert!(gamma_bound_single(&g3, 3, 1.0, Metric::H2).is_err());
        assert!(gamma_bound_single(&z, 2, 0.5, Metric::H1).is_err());
        assert!(gamma_bound_single(&z, 2, 1.0, Metric::Kolmogorov).is_err());
    }

    #[test]
    fn c_q_values() {
        assert_eq!(c_q(2), 1.0);
        for q in [2usize, 4, 6, 8] {
            let alt = 4.0 / (factorial(q / 2) * binomial(q, q / 2).powi(2));
            assert!((c_q(q) - alt).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_sum_examples() {
        let s = GramSpace::identity(2);
        let f1 = tensor_power(&s, &e(2, 0), 2).unwrap();
        let f2 = SymKernel::zero(&s, 6);
        let r = gamma_bound_sum(&f1, 2, 0.5, &f2, 6, 0.5, Metric::H2).unwrap();
        assert!(r.squared_total.abs() < 1e-12);

        let z1 = SymKernel::zero(&s, 2);
        let r = gamma_bound_sum(&z1, 2, 0.5, &f2, 6, 0.5, Metric::H2).unwrap();
        assert_eq!(r.squared_total, 12.0);

        let f4 = SymKernel::zero(&s, 4);
        assert!(gamma_bound_sum(&z1, 2, 0.5, &f4, 4, 0.5, Metric::H2).is_err());
        assert!(gamma_bound_sum(&f2, 6, 0.5, &z1, 2, 0.5, Metric::H2).is_err());
    }

    #[test]
    fn chi2_examples() {
        let s = GramSpace::identity(2);
        let z = SymKernel::zero(&s, 2);
        let r = chi2_double_bound(&z).unwrap();
        assert!((r.bound - 2.0 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);

        let f = SymKernel::from_entries(&s, 2, vec![(vec![0, 1], 1.0)]).unwrap();
        let r = chi2_double_bound(&f).unwrap();
        assert!((r.contraction_part - 4.0).abs() < 1e-12);

        let f = tensor_power(&s, &e(2, 0), 2).unwrap();
        let r = chi2_double_bound(&f).unwrap();
        assert!((r.contraction_part - 8.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(chi2_double_bound(&SymKernel::zero(&s, 3)).is_err());
    }

    #[test]
    fn constants() {
        let (k1, k2) = stein_constants(1.0).unwrap();
        assert_eq!(k1, Some(3.0));
        assert_eq!(k2, 3.0);
        let (k1, k2) = stein_constants(8.0).unwrap();
        assert!((k1.unwrap() - (std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(k2, 1.0);
        let (k1, k2) = stein_constants(0.5).unwrap();
        assert_eq!(k1, None);
        assert_eq!(k2, 10.0);
        assert!(stein_constants(0.0).is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("TV".parse::<Metric>().unwrap(), Metric::TotalVariation);
        assert_eq!("fortet-mourier".parse::<Metric>().unwrap(), Metric::FortetMourier);
        assert!("nope".parse::<Metric>().is_err());
    }
}
