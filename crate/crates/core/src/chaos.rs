//! Finite chaos expansions `c0 + sum_q I_q(f_q)` and the closed-form
//! identities of the Malliavin calculus on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::combin::{binomial, factorial};
use crate::error::{Error, Result};
use crate::tensor::{contract_sym, GramSpace, KernelJson, SymKernel};

/// `c0 + sum_i I_{q_i}(f_i)` with strictly increasing orders `q_i >= 1`.
#[derive(Debug, Clone)]
pub struct ChaosVector {
    space: Arc<GramSpace>,
    constant: f64,
    terms: Vec<SymKernel>,
}

impl ChaosVector {
    /// Terms may come in any order; kernels of equal order are summed and
    /// order-0 kernels are folded into the constant.
    pub fn new(space: &Arc<GramSpace>, constant: f64, terms: Vec<SymKernel>) -> Result<Self> {
        let mut v = ChaosVector::constant(space, constant);
        for k in terms {
            v.add_kernel(1.0, &k)?;
        }
        Ok(v)
    }

    pub fn constant(space: &Arc<GramSpace>, c: f64) -> Self {
        ChaosVector {
            space: space.clone(),
            constant: c,
            terms: Vec::new(),
        }
    }

    /// `I_q(f)` with `q = f.order()`.
    pub fn single(f: &SymKernel) -> Self {
        let mut v = ChaosVector::constant(f.space(), 0.0);
        v.add_kernel(1.0, f).expect("same space");
        v
    }

    pub fn space(&self) -> &Arc<GramSpace> {
        &self.space
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[SymKernel] {
        &self.terms
    }

    pub fn term(&self, order: usize) -> Option<&SymKernel> {
        self.terms.iter().find(|k| k.order() == order)
    }

    /// Highest order with a nonzero kernel (0 for constants).
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|k| !k.is_zero())
            .map(|k| k.order())
            .max()
            .unwrap_or(0)
    }

    /// `self += c * I_q(f)`.
    pub fn add_kernel(&mut self, c: f64, f: &SymKernel) -> Result<()> {
        if !self.space.same_as(f.space()) {
            return Err(Error::SpaceMismatch);
        }
        if f.order() == 0 {
            self.constant += c * f.coeff(&[]);
            return Ok(());
        }
        match self.terms.binary_search_by_key(&f.order(), |k| k.order()) {
            Ok(pos) => self.terms[pos] = self.terms[pos].axpy(c, f)?,
            Err(pos) => self.terms.insert(pos, f.scaled(c)),
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ChaosVector) -> Result<Self> {
        let mut out = self.clone();
        out.constant += c * other.constant;
        for k in &other.terms {
            out.add_kernel(c, k)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ChaosVector {
            space: self.space.clone(),
            constant: self.constant * c,
            terms: self.terms.iter().map(|k| k.scaled(c)).collect(),
        }
    }

    /// Product through the multiplication formula, distributed term by term.
    pub fn mul(&self, other: &ChaosVector) -> Result<Self> {
        if !self.space.same_as(&other.space) {
            return Err(Error::SpaceMismatch);
        }
        let mut out = ChaosVector::constant(&self.space, self.constant * other.constant);
        for k in &other.terms {
            out.add_kernel(self.constant, k)?;
        }
        for k in &self.terms {
            out.add_kernel(other.constant, k)?;
        }
        for f in &self.terms {
            for g in &other.terms {
                out = out.axpy(1.0, &multiply(f, g)?)?;
            }
        }
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        self.constant
    }

    /// `E[F^2] = c0^2 + sum q! ||f_q||^2`.
    pub fn second_moment(&self) -> f64 {
        self.constant * self.constant
            + self
                .terms
                .iter()
                .map(|k| factorial(k.order()) * k.norm_sq())
                .sum::<f64>()
    }

    /// Same expansion with every kernel expressed in an orthonormal frame.
    pub fn to_orthonormal(&self) -> ChaosVector {
        if self.space.is_identity() {
            return self.clone();
        }
        let frame = GramSpace::identity(self.space.dim());
        ChaosVector {
            space: frame,
            constant: self.constant,
            terms: self.terms.iter().map(|k| k.to_orthonormal()).collect(),
        }
    }
}

/// `H_q(x) = He_q(x) / q!` with `He_q` the monic (probabilists') Hermite
/// polynomial.
pub fn hermite(q: i64, x: f64) -> Result<f64> {
    if q < 0 {
        return Err(Error::InvalidOrder(format!("hermite order {q} < 0")));
    }
    Ok(hermite_monic(q as usize, x) / factorial(q as usize))
}

/// `He_q(x)` by the three-term recurrence `He_{k+1} = x He_k - k He_{k-1}`.
pub fn hermite_monic(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = He_k(x)` for `k < out.len()`.
pub fn hermite_table(x: f64, out: &mut [f64]) {
    for k in 0..out.len() {
        out[k] = match k {
            0 => 1.0,
            1 => x,
            _ => x * out[k - 1] - (k - 1) as f64 * out[k - 2],
        };
    }
}

/// Pre-decoded expansion for repeated pathwise evaluation.
#[derive(Debug, Clone)]
pub struct ChaosEvaluator {
    dim: usize,
    max_order: usize,
    constant: f64,
    /// (coefficient, [(coordinate, multiplicity)])
    monomials: Vec<(f64, Vec<(usize, usize)>)>,
}

impl ChaosEvaluator {
    pub fn new(f: &ChaosVector) -> Self {
        let ortho = f.to_orthonormal();
        let mut monomials = Vec::new();
        for k in ortho.terms() {
            for (idx, &c) in k.entries() {
                if c != 0.0 {
                    monomials.push((c, multiplicities(idx)));
                }
            }
        }
        ChaosEvaluator {
            dim: f.space().dim(),
            max_order: f.degree(),
            constant: f.constant_term(),
            monomials,
        }
    }

    /// `F(xi)` where `xi` are i.i.d. standard normal coordinates in the
    /// orthonormal frame.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        let w = self.max_order + 1;
        let mut table = vec![0.0; self.dim * w];
        for (i, &x) in xi.iter().enumerate() {
            hermite_table(x, &mut table[i * w..(i + 1) * w]);
        }
        let mut acc = self.constant;
        for (c, mult) in &self.monomials {
            let mut p = *c;
            for &(i, m) in mult {
                p *= table[i * w + m];
            }
            acc += p;
        }
        Ok(acc)
    }
}

/// Sorted multi-index -> [(coordinate, multiplicity)].
pub(crate) fn multiplicities(idx: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in idx {
        match out.last_mut() {
            Some((j, m)) if *j == i => *m += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// Pathwise value of `F` at orthonormal-frame coordinates `xi`.
pub fn eval_chaos(f: &ChaosVector, xi: &[f64]) -> Result<f64> {
    ChaosEvaluator::new(f).eval(xi)
}

/// `I_p(f) I_q(g) = sum_r r! C(p,r) C(q,r) I_{p+q-2r}(f ⊗~_r g)`.
pub fn multiply(f: &SymKernel, g: &SymKernel) -> Result<ChaosVector> {
    if !f.space().same_as(g.space()) {
        return Err(Error::SpaceMismatch);
    }
    let (p, q) = (f.order(), g.order());
    let mut out = ChaosVector::constant(f.space(), 0.0);
    for r in 0..=p.min(q) {
        let w = factorial(r) * binomial(p, r) * binomial(q, r);
        out.add_kernel(w, &contract_sym(f, g, r)?)?;
    }
    Ok(out)
}

/// `sum_{i,j} a_i sum_{r=1}^{min} (r-1)! C(q_i-1,r-1) C(q_j-1,r-1)
///  I_{q_i+q_j-2r}(f_i ⊗~_r f_j)` for per-term weights `a_i`.
fn derivative_pairing(f: &ChaosVector, weight: impl Fn(usize, usize) -> f64) -> Result<ChaosVector> {
    let mut out = ChaosVector::constant(f.space(), 0.0);
    for fi in f.terms() {
        for fj in f.terms() {
            let (qi, qj) = (fi.order(), fj.order());
            let w0 = weight(qi, qj);
            for r in 1..=qi.min(qj) {
                let w = w0 * factorial(r - 1) * binomial(qi - 1, r - 1) * binomial(qj - 1, r - 1);
                out.add_kernel(w, &contract_sym(fi, fj, r)?)?;
            }
        }
    }
    Ok(out)
}

/// Chaos expansion of `<DF, -DL^{-1}F>`. Its constant term is
/// `sum q_i! ||f_i||^2 = E[F^2]`.
pub fn malliavin_inner(f: &ChaosVector) -> Result<ChaosVector> {
    if f.constant_term() != 0.0 {
        return Err(Error::NotCentered(f.constant_term()));
    }
    derivative_pairing(f, |qi, _| qi as f64)
}

/// Chaos expansion of `||DF||^2`. The constant is ignored (D kills it).
pub fn derivative_norm_sq(f: &ChaosVector) -> Result<ChaosVector> {
    derivative_pairing(f, |qi, qj| (qi * qj) as f64)
}

/// `T_z F = sum_q e^{-qz} J_q F`.
pub fn ou_semigroup(f: &ChaosVector, z: f64) -> Result<ChaosVector> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("semigroup time z = {z} must be >= 0")));
    }
    Ok(ChaosVector {
        space: f.space.clone(),
        constant: f.constant,
        terms: f
            .terms
            .iter()
            .map(|k| k.scaled((-(k.order() as f64) * z).exp()))
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    order: usize,
    kernel: KernelJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChaosJson {
    constant: f64,
    terms: Vec<TermJson>,
    /// Only needed for a pure constant in a non-default space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl Serialize for ChaosVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChaosJson {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|k| TermJson {
                    order: k.order(),
                    kernel: KernelJson::from_kernel(k),
                })
                .collect(),
            dim: Some(self.space.dim()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChaosVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ChaosJson::deserialize(d)?;
        let space = match j.terms.first() {
            Some(t) => t.kernel.space().map_err(D::Error::custom)?,
            None => GramSpace::identity(j.dim.unwrap_or(1)),
        };
        let mut v = ChaosVector::constant(&space, j.constant);
        for t in &j.terms {
            if t.order != t.kernel.order {
                return Err(D::Error::custom(format!(
                    "term order {} does not match kernel order {}",
                    t.order, t.kernel.order
                )));
            }
            let own = t.kernel.space().map_err(D::Error::custom)?;
            if !own.same_as(&space) {
                return Err(D::Error::custom("terms live in different Gram spaces"));
            }
            let k = t.kernel.into_kernel_in(&space).map_err(D::Error::custom)?;
            v.add_kernel(1.0, &k).map_err(D::Error::custom)?;
        }
        Ok(v)
    }
}
