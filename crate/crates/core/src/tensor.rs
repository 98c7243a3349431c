//! Symmetric tensors over a finite-dimensional space with an explicit Gram
//! metric.
//!
//! The Hilbert space is modelled as `R^d` with `<e_i, e_j> = G[i][j]`. A
//! [`SymKernel`] stores one coefficient per non-decreasing multi-index: the
//! coefficient of `m` is the sum of the full-tensor entries over every
//! distinct ordering of `m`. With this convention `I_q(f)` over an
//! orthonormal basis is `sum_m coeff(m) * prod_k He_{mult_k(m)}(xi_k)`.
//!
//! Dense row-major [`Tensor`]s appear only as contraction results and as the
//! working representation inside contraction kernels.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combin::{distinct_orderings, for_each_sorted_index, next_permutation};
use crate::error::{Error, Result};

/// Relative tolerance for the positive-semidefinite check.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// `R^d` with an inner-product matrix.
#[derive(Debug)]
pub struct GramSpace {
    gram: DMatrix<f64>,
    identity: bool,
    factor: OnceLock<DMatrix<f64>>,
}

impl GramSpace {
    /// Validates symmetry and positive semidefiniteness.
    pub fn new(gram: DMatrix<f64>) -> Result<Arc<Self>> {
        let d = gram.nrows();
        if d == 0 || gram.ncols() != d {
            return Err(Error::NotPsd(format!(
                "gram must be a non-empty square matrix, got {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        for i in 0..d {
            for j in 0..i {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::NotPsd(format!("G[{i}][{j}] != G[{j}][{i}]")));
                }
            }
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPsd("non-finite entry".into()));
        }
        let identity = is_identity(&gram);
        if !identity {
            let eig = gram.clone().symmetric_eigen();
            let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPsd(format!("smallest eigenvalue {min:e}")));
            }
        }
        Ok(Arc::new(GramSpace {
            gram,
            identity,
            factor: OnceLock::new(),
        }))
    }

    pub fn identity(dim: usize) -> Arc<Self> {
        Arc::new(GramSpace {
            gram: DMatrix::identity(dim, dim),
            identity: true,
            factor: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Arc<Self>> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotPsd("gram rows must form a square matrix".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(d, d, &flat))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.gram.row(i).iter().copied().collect())
            .collect()
    }

    /// `<h, g>` for coordinate vectors.
    pub fn inner(&self, h: &[f64], g: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, hi) in h.iter().enumerate() {
            for (j, gj) in g.iter().enumerate() {
                acc += hi * self.gram[(i, j)] * gj;
            }
        }
        acc
    }

    /// A factor `L` with `G = L L^T`: Cholesky, retried with a diagonal
    /// jitter of `1e-12 * max(diag)`, then an eigenvalue square root for
    /// singular matrices.
    pub fn factor(&self) -> &DMatrix<f64> {
        self.factor.get_or_init(|| {
            if self.identity {
                return DMatrix::identity(self.dim(), self.dim());
            }
            if let Some(ch) = self.gram.clone().cholesky() {
                return ch.l();
            }
            let jitter = 1e-12 * self.gram.diagonal().max().max(f64::MIN_POSITIVE);
            let mut g = self.gram.clone();
            for i in 0..self.dim() {
                g[(i, i)] += jitter;
            }
            if let Some(ch) = g.cholesky() {
                return ch.l();
            }
            let eig = self.gram.clone().symmetric_eigen();
            let mut v = eig.eigenvectors.clone();
            for (j, lam) in eig.eigenvalues.iter().enumerate() {
                let s = lam.max(0.0).sqrt();
                v.column_mut(j).scale_mut(s);
            }
            v
        })
    }

    /// Same matrix (not merely the same allocation).
    pub fn same_as(&self, other: &GramSpace) -> bool {
        std::ptr::eq(self, other) || self.gram == other.gram
    }
}

fn is_identity(g: &DMatrix<f64>) -> bool {
    let d = g.nrows();
    (0..d).all(|i| (0..d).all(|j| g[(i, j)] == if i == j { 1.0 } else { 0.0 }))
}

fn check_space(a: &Arc<GramSpace>, b: &Arc<GramSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.same_as(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Dense, generally non-symmetric tensor of order `q`, row-major over `[d; q]`.
#[derive(Debug, Clone)]
pub struct Tensor {
    space: Arc<GramSpace>,
    order: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(space: &Arc<GramSpace>, order: usize) -> Self {
        let len = space.dim().pow(order as u32);
        Tensor {
            space: space.clone(),
            order,
            data: vec![0.0; len],
        }
    }

    pub fn from_data(space: &Arc<GramSpace>, order: usize, data: Vec<f64>) -> Result<Self> {
        let len = space.dim().pow(order as u32);
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: data.len(),
            });
        }
        Ok(Tensor {
            space: space.clone(),
            order,
            data,
        })
    }

    /// Tensor product of coordinate vectors `v_1 ⊗ ... ⊗ v_q`.
    pub fn outer(space: &Arc<GramSpace>, vectors: &[&[f64]]) -> Result<Self> {
        let d = space.dim();
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        let mut data = vec![1.0];
        for v in vectors {
            let mut next = Vec::with_capacity(data.len() * d);
            for a in &data {
                next.extend(v.iter().map(|b| a * b));
            }
            data = next;
        }
        Ok(Tensor {
            space: space.clone(),
            order: vectors.len(),
            data,
        })
    }

    pub fn space(&self) -> &Arc<GramSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        let d = self.dim();
        index.iter().fold(0, |acc, &i| acc * d + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.flat_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let k = self.flat_index(index);
        self.data[k] = value;
    }

    /// Decodes a flat position into its index tuple.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        let d = self.dim();
        for slot in out.iter_mut().rev() {
            *slot = flat % d;
            flat /= d;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// Copy with `G` applied along every axis.
    fn lowered(&self) -> Vec<f64> {
        let mut data = self.data.clone();
        if !self.space.is_identity() {
            for axis in 0..self.order {
                data = apply_along_axis(&data, self.dim(), self.order, axis, self.space.gram(), false);
            }
        }
        data
    }

    /// `<s, t>` in the induced metric on the q-fold tensor power.
    pub fn inner(&self, other: &Tensor) -> Result<f64> {
        check_space(&self.space, &other.space)?;
        if self.order != other.order {
            return Err(Error::InvalidOrder(format!(
                "inner product of orders {} and {}",
                self.order, other.order
            )));
        }
        let lowered = other.lowered();
        Ok(dot(&self.data, &lowered))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.lowered())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out[.., a, ..] = sum_b M[a, b] t[.., b, ..]` (or `M[b, a]` when
/// `transpose`) along one axis of a row-major `[d; order]` array.
fn apply_along_axis(
    data: &[f64],
    d: usize,
    order: usize,
    axis: usize,
    m: &DMatrix<f64>,
    transpose: bool,
) -> Vec<f64> {
    let inner = d.pow((order - axis - 1) as u32);
    let outer = d.pow(axis as u32);
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        let base = o * d * inner;
        for a in 0..d {
            let dst = base + a * inner;
            for b in 0..d {
                let w = if transpose { m[(b, a)] } else { m[(a, b)] };
                if w == 0.0 {
                    continue;
                }
                let src = base + b * inner;
                for k in 0..inner {
                    out[dst + k] += w * data[src + k];
                }
            }
        }
    }
    out
}

/// Symmetric kernel of order `q` stored by sorted multi-index.
#[derive(Debug, Clone)]
pub struct SymKernel {
    space: Arc<GramSpace>,
    order: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl SymKernel {
    pub fn zero(space: &Arc<GramSpace>, order: usize) -> Self {
        SymKernel {
            space: space.clone(),
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(space: &Arc<GramSpace>, value: f64) -> Self {
        let mut k = Self::zero(space, 0);
        if value != 0.0 {
            k.coeffs.insert(Vec::new(), value);
        }
        k
    }

    /// Builds a kernel from `(multi-index, coefficient)` pairs; indices are
    /// sorted and repeated entries accumulate.
    pub fn from_entries(
        space: &Arc<GramSpace>,
        order: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        let mut k = Self::zero(space, order);
        for (idx, v) in entries {
            k.add_entry(idx, v)?;
        }
        Ok(k)
    }

    /// Adds `value` to the coefficient of the (sorted) multi-index.
    pub fn add_entry(&mut self, mut index: Vec<usize>, value: f64) -> Result<()> {
        if index.len() != self.order {
            return Err(Error::InvalidIndex(format!(
                "multi-index {index:?} has length {}, kernel order is {}",
                index.len(),
                self.order
            )));
        }
        let d = self.space.dim();
        if let Some(bad) = index.iter().find(|&&i| i >= d) {
            return Err(Error::InvalidIndex(format!("index {bad} outside [0, {d})")));
        }
        index.sort_unstable();
        *self.coeffs.entry(index).or_insert(0.0) += value;
        Ok(())
    }

    pub fn space(&self) -> &Arc<GramSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Coefficient of a multi-index (any ordering).
    pub fn coeff(&self, index: &[usize]) -> f64 {
        let mut k = index.to_vec();
        k.sort_unstable();
        self.coeffs.get(&k).copied().unwrap_or(0.0)
    }

    /// Entry of the implied full symmetric tensor.
    pub fn full_entry(&self, index: &[usize]) -> f64 {
        let mut k = index.to_vec();
        k.sort_unstable();
        self.coeffs.get(&k).map_or(0.0, |c| c / distinct_orderings(&k))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymKernel {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &SymKernel) -> Result<Self> {
        check_space(&self.space, &other.space)?;
        if self.order != other.order {
            return Err(Error::InvalidOrder(format!(
                "cannot add kernels of orders {} and {}",
                self.order, other.order
            )));
        }
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert(0.0) += c * v;
        }
        Ok(out)
    }

    /// Expands into the full symmetric tensor.
    pub fn to_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(&self.space, self.order);
        for (idx, &c) in &self.coeffs {
            let share = c / distinct_orderings(idx);
            let mut perm = idx.clone();
            loop {
                t.set(&perm, share);
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        t
    }

    /// Squared norm in the induced metric.
    pub fn norm_sq(&self) -> f64 {
        if self.order == 0 {
            let c = self.coeffs.get(&Vec::new()).copied().unwrap_or(0.0);
            return c * c;
        }
        if self.space.is_identity() {
            return self
                .coeffs
                .iter()
                .map(|(k, c)| c * c / distinct_orderings(k))
                .sum();
        }
        self.to_dense().norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    /// Re-expresses the kernel in an orthonormal frame `u` with
    /// `e_i = sum_k L[i][k] u_k`, where `G = L L^T`.
    pub fn to_orthonormal(&self) -> SymKernel {
        if self.space.is_identity() {
            return self.clone();
        }
        let d = self.dim();
        let l = self.space.factor();
        let mut data = self.to_dense().data;
        for axis in 0..self.order {
            data = apply_along_axis(&data, d, self.order, axis, l, true);
        }
        let frame = GramSpace::identity(d);
        let t = Tensor::from_data(&frame, self.order, data).expect("shape preserved");
        symmetrize(&t)
    }
}

impl PartialEq for SymKernel {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.space.same_as(&other.space) && self.coeffs == other.coeffs
    }
}

/// `h^{⊗q}` for a coordinate vector `h`.
pub fn tensor_power(space: &Arc<GramSpace>, h: &[f64], q: i64) -> Result<SymKernel> {
    if q < 0 {
        return Err(Error::InvalidOrder(format!("tensor power order {q} < 0")));
    }
    let q = q as usize;
    let d = space.dim();
    if h.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.len(),
        });
    }
    let support: Vec<usize> = (0..d).filter(|&i| h[i] != 0.0).collect();
    let mut k = SymKernel::zero(space, q);
    if q == 0 {
        k.coeffs.insert(Vec::new(), 1.0);
        return Ok(k);
    }
    for_each_sorted_index(support.len(), q, |pos| {
        let idx: Vec<usize> = pos.iter().map(|&p| support[p]).collect();
        let prod: f64 = idx.iter().map(|&i| h[i]).product();
        let c = prod * distinct_orderings(&idx);
        k.coeffs.insert(idx, c);
    });
    Ok(k)
}

/// Average of a tensor over all permutations of its slots.
pub fn symmetrize(t: &Tensor) -> SymKernel {
    let mut k = SymKernel::zero(&t.space, t.order);
    if t.order == 0 {
        if t.data[0] != 0.0 {
            k.coeffs.insert(Vec::new(), t.data[0]);
        }
        return k;
    }
    let mut idx = vec![0usize; t.order];
    for (flat, &v) in t.data.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        t.unflatten(flat, &mut idx);
        let mut key = idx.clone();
        key.sort_unstable();
        *k.coeffs.entry(key).or_insert(0.0) += v;
    }
    k
}

/// `f ⊗_r g`, pairing the last `r` slots of each kernel through `G`.
/// The result keeps the `p - r` slots of `f` first.
pub fn contract(f: &SymKernel, g: &SymKernel, r: usize) -> Result<Tensor> {
    check_space(&f.space, &g.space)?;
    let (p, q) = (f.order, g.order);
    if r > p.min(q) {
        return Err(Error::InvalidContraction { r, p, q });
    }
    let space = &f.space;
    let d = space.dim();
    let fd = f.to_dense();
    let mut gd = g.to_dense().data;
    if !space.is_identity() {
        for axis in (q - r)..q {
            gd = apply_along_axis(&gd, d, q, axis, space.gram(), false);
        }
    }
    let rows_f = d.pow((p - r) as u32);
    let rows_g = d.pow((q - r) as u32);
    let inner = d.pow(r as u32);
    let fm = DMatrix::from_row_slice(rows_f, inner, &fd.data);
    let gm = DMatrix::from_row_slice(rows_g, inner, &gd);
    let prod = fm * gm.transpose();
    // row-major flattening of a column-major matrix is its transpose's storage
    let data = prod.transpose().as_slice().to_vec();
    Tensor::from_data(space, p + q - 2 * r, data)
}

/// `f ⊗~_r g`: the symmetrized contraction.
pub fn contract_sym(f: &SymKernel, g: &SymKernel, r: usize) -> Result<SymKernel> {
    Ok(symmetrize(&contract(f, g, r)?))
}

/// `<f, g>` in the induced metric.
pub fn gram_inner(f: &SymKernel, g: &SymKernel) -> Result<f64> {
    check_space(&f.space, &g.space)?;
    if f.order != g.order {
        return Err(Error::InvalidOrder(format!(
            "inner product of orders {} and {}",
            f.order, g.order
        )));
    }
    if f.order == 0 {
        let a = f.coeffs.get(&Vec::new()).copied().unwrap_or(0.0);
        let b = g.coeffs.get(&Vec::new()).copied().unwrap_or(0.0);
        return Ok(a * b);
    }
    if f.space.is_identity() {
        return Ok(f
            .coeffs
            .iter()
            .filter_map(|(k, a)| g.coeffs.get(k).map(|b| a * b / distinct_orderings(k)))
            .sum());
    }
    f.to_dense().inner(&g.to_dense())
}

/// JSON form: `{dim, order, entries: [[[i1..iq], value], ..], gram}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KernelJson {
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<(Vec<usize>, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
}

impl KernelJson {
    pub fn from_kernel(k: &SymKernel) -> Self {
        KernelJson {
            dim: k.dim(),
            order: k.order,
            entries: k.coeffs.iter().map(|(i, v)| (i.clone(), *v)).collect(),
            gram: Some(k.space.rows()),
        }
    }

    /// Missing `gram` means the identity.
    pub fn space(&self) -> Result<Arc<GramSpace>> {
        match &self.gram {
            None => Ok(GramSpace::identity(self.dim)),
            Some(rows) => {
                let s = GramSpace::from_rows(rows)?;
                if s.dim() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: s.dim(),
                    });
                }
                Ok(s)
            }
        }
    }

    pub fn into_kernel_in(&self, space: &Arc<GramSpace>) -> Result<SymKernel> {
        SymKernel::from_entries(space, self.order, self.entries.iter().cloned())
    }

    pub fn into_kernel(&self) -> Result<SymKernel> {
        self.into_kernel_in(&self.space()?)
    }
}

impl Serialize for SymKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelJson::from_kernel(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = KernelJson::deserialize(d)?;
        j.into_kernel().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    #[test]
    fn rank_one_powers() {
        let s = GramSpace::identity(3);
        let k = tensor_power(&s, &e(3, 1), 2).unwrap();
        assert_eq!(k.coeff(&[1, 1]), 1.0);
        assert_eq!(k.entries().count(), 1);

        let k0 = tensor_power(&s, &e(3, 1), 0).unwrap();
        assert_eq!(k0.order(), 0);
        assert_eq!(k0.coeff(&[]), 1.0);

        let h = vec![1.0, 1.0, 0.0];
        let k = tensor_power(&s, &h, 2).unwrap();
        assert_eq!(k.coeff(&[0, 0]), 1.0);
        assert_eq!(k.coeff(&[0, 1]), 2.0);
        assert_eq!(k.coeff(&[1, 1]), 1.0);
        let dense = k.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(dense.get(&[i, j]), 1.0);
            }
        }
        assert!(matches!(tensor_power(&s, &h, -1), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn symmetrize_examples() {
        let s = GramSpace::identity(3);
        let t = Tensor::outer(&s, &[&e(3, 0), &e(3, 1)]).unwrap();
        let k = symmetrize(&t).to_dense();
        assert_eq!(k.get(&[0, 1]), 0.5);
        assert_eq!(k.get(&[1, 0]), 0.5);

        let t = Tensor::outer(&s, &[&e(3, 0), &e(3, 0)]).unwrap();
        let k = symmetrize(&t).to_dense();
        assert_eq!(k.data(), t.data());

        let t = Tensor::outer(&s, &[&e(3, 0), &e(3, 1), &e(3, 2)]).unwrap();
        let k = symmetrize(&t).to_dense();
        let mut perm = vec![0, 1, 2];
        loop {
            assert!((k.get(&perm) - 1.0 / 6.0).abs() < 1e-15);
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }

    #[test]
    fn contraction_examples() {
        let s = GramSpace::identity(2);
        let e1 = tensor_power(&s, &e(2, 0), 1).unwrap();
        let e2 = tensor_power(&s, &e(2, 1), 1).unwrap();
        let c = contract(&e1, &e2, 0).unwrap();
        assert_eq!(c.data(), &[0.0, 1.0, 0.0, 0.0]);

        let e11 = tensor_power(&s, &e(2, 0), 2).unwrap();
        let c = contract(&e11, &e11, 2).unwrap();
        assert_eq!(c.order(), 0);
        assert_eq!(c.data(), &[1.0]);

        // f = (e1e1 + e2e2)/2
        let f = SymKernel::from_entries(&s, 2, vec![(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let c = contract(&f, &f, 1).unwrap();
        assert_eq!(c.data(), &[0.25, 0.0, 0.0, 0.25]);

        assert!(matches!(
            contract(&e1, &e11, 2),
            Err(Error::InvalidContraction { .. })
        ));
        let other = GramSpace::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = tensor_power(&other, &e(2, 0), 1).unwrap();
        assert!(matches!(contract(&e1, &g, 0), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn gram_inner_examples() {
        let s = GramSpace::identity(2);
        let e1 = tensor_power(&s, &e(2, 0), 1).unwrap();
        assert_eq!(gram_inner(&e1, &e1).unwrap(), 1.0);

        let rho = 0.3;
        let g = GramSpace::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let a = tensor_power(&g, &e(2, 0), 1).unwrap();
        let b = tensor_power(&g, &e(2, 1), 1).unwrap();
        assert!((gram_inner(&a, &b).unwrap() - rho).abs() < 1e-15);

        let t = Tensor::outer(&s, &[&e(2, 0), &e(2, 1)]).unwrap();
        assert_eq!(t.inner(&t).unwrap(), 1.0);

        let e11 = tensor_power(&s, &e(2, 0), 2).unwrap();
        assert!(matches!(gram_inner(&e1, &e11), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn gram_validation() {
        assert!(GramSpace::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(GramSpace::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(GramSpace::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_ok());
    }

    #[test]
    fn singular_gram_factor_reproduces_gram() {
        let g = GramSpace::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let l = g.factor();
        let back = l * l.transpose();
        assert!((back - g.gram()).abs().max() < 1e-10);
    }

    #[test]
    fn orthonormal_frame_preserves_inner_products() {
        let g = GramSpace::from_rows(&[vec![1.0, 0.4, 0.1], vec![0.4, 2.0, 0.3], vec![0.1, 0.3, 1.5]]).unwrap();
        let f = SymKernel::from_entries(&g, 2, vec![(vec![0, 1], 1.0), (vec![2, 2], -0.5), (vec![0, 0], 0.7)])
            .unwrap();
        let h = SymKernel::from_entries(&g, 2, vec![(vec![1, 2], 0.3), (vec![0, 0], 1.2)]).unwrap();
        let a = gram_inner(&f, &h).unwrap();
        let b = gram_inner(&f.to_orthonormal(), &h.to_orthonormal()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn json_layout() {
        let g = GramSpace::identity(2);
        let k = SymKernel::from_entries(&g, 2, vec![(vec![1, 0], 2.0)]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"dim":2,"order":2,"entries":[[[0,1],2.0]],"gram":[[1.0,0.0],[0.0,1.0]]}"#);
        let back: SymKernel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        let no_gram: SymKernel = serde_json::from_str(r#"{"dim":2,"order":1,"entries":[[[1],1.0]]}"#).unwrap();
        assert!(no_gram.space().is_identity());
        let bad: std::result::Result<SymKernel, _> =
            serde_json::from_str(r#"{"dim":2,"order":1,"entries":[[[5],1.0]]}"#);
        assert!(bad.is_err());
    }
}
