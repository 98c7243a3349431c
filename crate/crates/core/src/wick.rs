//! Exact Gaussian moments by brute force: expand chaos expansions into
//! polynomials in i.i.d. standard normal coordinates and count Wick
//! pairings monomial by monomial.
//!
//! Deliberately independent of the isometry and multiplication formulas so
//! it can serve as an oracle for them.

use std::collections::{BTreeMap, HashMap};

use crate::chaos::{multiplicities, ChaosVector};
use crate::combin::factorial;
use crate::error::{Error, Result};

/// Default cap on the total polynomial degree handled by the oracle.
pub const DEFAULT_MAX_DEGREE: usize = 16;

/// Polynomial in `d` variables: exponent vector -> coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, f64>,
}

impl Poly {
    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(vec![0; nvars], c);
        }
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&a| a as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn coeff(&self, exps: &[u16]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    fn add_term(&mut self, exps: Vec<u16>, c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(exps).or_insert(0.0) += c;
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::constant(self.nvars, 0.0);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, s: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, 1.0);
        for _ in 0..s {
            out = out.mul(self);
        }
        out
    }

    /// Polynomial form of a chaos expansion, in the orthonormal frame.
    pub fn from_chaos(f: &ChaosVector) -> Poly {
        let ortho = f.to_orthonormal();
        let d = ortho.space().dim();
        let mut out = Poly::constant(d, ortho.constant_term());
        let max = ortho.terms().iter().map(|k| k.order()).max().unwrap_or(0);
        let he = hermite_coefficients(max);
        for k in ortho.terms() {
            for (idx, &c) in k.entries() {
                if c == 0.0 {
                    continue;
                }
                let mut term = Poly::constant(d, c);
                for (var, m) in multiplicities(idx) {
                    let mut factor = Poly::constant(d, 0.0);
                    for (p, &a) in he[m].iter().enumerate() {
                        if a != 0.0 {
                            let mut e = vec![0u16; d];
                            e[var] = p as u16;
                            factor.add_term(e, a);
                        }
                    }
                    term = term.mul(&factor);
                }
                out = out.add(&term);
            }
        }
        out
    }

    /// `E[P(xi)]` for i.i.d. standard normal `xi`.
    pub fn expectation(&self) -> f64 {
        let mut memo = HashMap::new();
        let mut acc = 0.0;
        for (e, &c) in &self.terms {
            let mut sig: Vec<u16> = e.iter().copied().filter(|&a| a > 0).collect();
            sig.sort_unstable();
            acc += c * pairings(&sig, &mut memo);
        }
        acc
    }
}

/// Monomial coefficients of `He_0..=He_max`: `he[k][p]` multiplies `x^p`.
fn hermite_coefficients(max: usize) -> Vec<Vec<f64>> {
    let mut he: Vec<Vec<f64>> = vec![vec![1.0]];
    if max >= 1 {
        he.push(vec![0.0, 1.0]);
    }
    for k in 1..max {
        let mut next = vec![0.0; k + 2];
        for (p, &a) in he[k].iter().enumerate() {
            next[p + 1] += a;
        }
        for (p, &a) in he[k - 1].iter().enumerate() {
            next[p] -= k as f64 * a;
        }
        he.push(next);
    }
    he
}

/// Number of perfect matchings of a multiset of independent standard normal
/// factors in which only equal variables may be paired. The signature is the
/// sorted list of positive exponents.
fn pairings(sig: &[u16], memo: &mut HashMap<Vec<u16>, f64>) -> f64 {
    if sig.is_empty() {
        return 1.0;
    }
    if let Some(&v) = memo.get(sig) {
        return v;
    }
    // pair the first copy of the first variable with one of its a-1 siblings
    let a = sig[0];
    let value = if a < 2 {
        0.0
    } else {
        let mut rest: Vec<u16> = sig.to_vec();
        rest[0] -= 2;
        if rest[0] == 0 {
            rest.remove(0);
        }
        rest.sort_unstable();
        (a - 1) as f64 * pairings(&rest, memo)
    };
    memo.insert(sig.to_vec(), value);
    value
}

/// Moment oracle with a configurable degree guard.
#[derive(Debug, Clone, Copy)]
pub struct WickOracle {
    pub max_degree: usize,
}

impl Default for WickOracle {
    fn default() -> Self {
        WickOracle {
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

impl WickOracle {
    pub fn with_max_degree(max_degree: usize) -> Self {
        WickOracle { max_degree }
    }

    /// `E[prod_k F_k^{s_k}]`.
    pub fn expect_product(&self, factors: &[(&ChaosVector, u32)]) -> Result<f64> {
        let total: usize = factors.iter().map(|(f, s)| f.degree() * *s as usize).sum();
        if total > self.max_degree {
            return Err(Error::Complexity(format!(
                "total degree {total} exceeds the limit {}",
                self.max_degree
            )));
        }
        let d = match factors.first() {
            Some((f, _)) => f.space().dim(),
            None => return Ok(1.0),
        };
        for (f, _) in factors {
            if !f.space().same_as(factors[0].0.space()) {
                return Err(Error::SpaceMismatch);
            }
        }
        let mut acc = Poly::constant(d, 1.0);
        for (f, s) in factors {
            if *s > 0 {
                acc = acc.mul(&Poly::from_chaos(f).pow(*s));
            }
        }
        Ok(acc.expectation())
    }

    pub fn moment(&self, f: &ChaosVector, s: u32) -> Result<f64> {
        self.expect_product(&[(f, s)])
    }
}

/// `E[F^s]` with the default degree guard.
pub fn exact_moment(f: &ChaosVector, s: i64) -> Result<f64> {
    if s < 0 {
        return Err(Error::InvalidParameter(format!("moment order {s} < 0")));
    }
    WickOracle::default().moment(f, s as u32)
}

/// `(2k-1)!!` for even `n = 2k`, zero for odd `n`: the standard normal moment.
pub fn normal_moment(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    factorial(n) / (factorial(n / 2) * 2f64.powi((n / 2) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{tensor_power, GramSpace, SymKernel};

    fn e(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    #[test]
    fn moment_examples() {
        let s = GramSpace::identity(2);
        let f2 = ChaosVector::single(&tensor_power(&s, &e(2, 0), 2).unwrap());
        assert!((exact_moment(&f2, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!((exact_moment(&f2, 3).unwrap() - 8.0).abs() < 1e-12);
        let f1 = ChaosVector::single(&tensor_power(&s, &e(2, 0), 1).unwrap());
        assert!((exact_moment(&f1, 4).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(exact_moment(&f2, 9), Err(Error::Complexity(_))));
        assert!(WickOracle::with_max_degree(18).moment(&f2, 9).is_ok());
    }

    #[test]
    fn pairing_counts_match_double_factorials() {
        let mut memo = HashMap::new();
        for n in 0..12u16 {
            let sig = if n == 0 { vec![] } else { vec![n] };
            assert_eq!(pairings(&sig, &mut memo), normal_moment(n as usize));
        }
        assert_eq!(pairings(&[2, 4], &mut memo), 3.0);
        assert_eq!(pairings(&[1, 3], &mut memo), 0.0);
    }

    #[test]
    fn correlated_first_chaos_covariance() {
        let rho = 0.35;
        let g = GramSpace::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let a = ChaosVector::single(&tensor_power(&g, &e(2, 0), 1).unwrap());
        let b = ChaosVector::single(&tensor_power(&g, &e(2, 1), 1).unwrap());
        let cov = WickOracle::default().expect_product(&[(&a, 1), (&b, 1)]).unwrap();
        assert!((cov - rho).abs() < 1e-12);
        // Isserlis: E[A^2 B^2] = 1 + 2 rho^2
        let m = WickOracle::default().expect_product(&[(&a, 2), (&b, 2)]).unwrap();
        assert!((m - (1.0 + 2.0 * rho * rho)).abs() < 1e-12);
    }

    #[test]
    fn polynomial_of_mixed_kernel() {
        let s = GramSpace::identity(2);
        let k = SymKernel::from_entries(&s, 2, vec![(vec![0, 1], 1.0)]).unwrap();
        let p = Poly::from_chaos(&ChaosVector::single(&k));
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&[1, 1]), 1.0);
    }
}
