//! C interface to `chaos-stein`.
//!
//! Objects cross the boundary as opaque handles created by `cs_*_new` and
//! released by the matching `cs_*_free`. Every fallible call returns a
//! [`CsStatus`]; on failure the message is available from
//! [`cs_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use chaos_stein::bounds::{gamma_bound_single, gauss_bound_single, BoundReport, Metric};
use chaos_stein::breuer_major::{bm_bound_exact, BmInstance};
use chaos_stein::simulate::sample_Zn;
use chaos_stein::tensor::{GramSpace, KernelJson, SymKernel};
use chaos_stein::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidOrder = 3,
    SpaceMismatch = 4,
    NotPsd = 5,
    Divergence = 6,
    ResourceLimit = 7,
    Accuracy = 8,
    Parse = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Distance selector for bound calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMetric {
    Kolmogorov = 0,
    TotalVariation = 1,
    Wasserstein = 2,
    FortetMourier = 3,
    H1 = 4,
    H2 = 5,
}

impl From<CsMetric> for Metric {
    fn from(m: CsMetric) -> Self {
        match m {
            CsMetric::Kolmogorov => Metric::Kolmogorov,
            CsMetric::TotalVariation => Metric::TotalVariation,
            CsMetric::Wasserstein => Metric::Wasserstein,
            CsMetric::FortetMourier => Metric::FortetMourier,
            CsMetric::H1 => Metric::H1,
            CsMetric::H2 => Metric::H2,
        }
    }
}

/// Scalar parts of a bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsBound {
    pub variance_term: f64,
    pub contraction_sum: f64,
    pub squared_total: f64,
    pub metric_constant: f64,
    pub bound: f64,
}

impl From<&BoundReport> for CsBound {
    fn from(r: &BoundReport) -> Self {
        CsBound {
            variance_term: r.variance_term,
            contraction_sum: r.contraction_sum(),
            squared_total: r.squared_total,
            metric_constant: r.metric_constant,
            bound: r.bound,
        }
    }
}

/// Opaque Gram space handle.
pub struct CsSpace(Arc<GramSpace>);

/// Opaque symmetric kernel handle.
pub struct CsKernel(SymKernel);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::InvalidOrder(_) | Error::InvalidContraction { .. } => CsStatus::InvalidOrder,
        Error::SpaceMismatch | Error::DimensionMismatch { .. } => CsStatus::SpaceMismatch,
        Error::NotPsd(_) => CsStatus::NotPsd,
        Error::Divergence(_) => CsStatus::Divergence,
        Error::ResourceLimit(_) | Error::Complexity(_) => CsStatus::ResourceLimit,
        Error::Accuracy(_) | Error::Integrability(_) => CsStatus::Accuracy,
        Error::Serialization(_) => CsStatus::Parse,
        _ => CsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (CsStatus, String)>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated) and returns its full length in bytes, excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Identity Gram matrix of size `dim`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_space_identity(dim: usize, out: *mut *mut CsSpace) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if dim == 0 {
            return Err((CsStatus::InvalidArgument, "dimension must be positive".into()));
        }
        *out = Box::into_raw(Box::new(CsSpace(GramSpace::identity(dim))));
        Ok(())
    })
}

/// Gram space from a row-major `dim x dim` matrix.
///
/// # Safety
/// `gram` must point to `dim * dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_space_new(gram: *const f64, dim: usize, out: *mut *mut CsSpace) -> CsStatus {
    guard(|| {
        if gram.is_null() {
            return Err(null("gram"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let data = std::slice::from_raw_parts(gram, dim * dim);
        let rows: Vec<Vec<f64>> = data.chunks(dim.max(1)).map(|r| r.to_vec()).collect();
        let space = GramSpace::from_rows(&rows).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CsSpace(space)));
        Ok(())
    })
}

/// # Safety
/// `space` must be null or a handle from `cs_space_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_space_free(space: *mut CsSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Zero kernel of the given order.
///
/// # Safety
/// `space` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_kernel_new(space: *const CsSpace, order: usize, out: *mut *mut CsKernel) -> CsStatus {
    guard(|| {
        let space = space.as_ref().ok_or_else(|| null("space"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(CsKernel(SymKernel::zero(&space.0, order))));
        Ok(())
    })
}

/// Adds `value` to the symmetric coefficient of the multi-index
/// `index[0..order]` (any ordering; coefficients sum over orderings).
///
/// # Safety
/// `kernel` must be a live handle; `index` must point to `len` entries.
#[no_mangle]
pub unsafe extern "C" fn cs_kernel_add_entry(
    kernel: *mut CsKernel,
    index: *const usize,
    len: usize,
    value: f64,
) -> CsStatus {
    guard(|| {
        let k = kernel.as_mut().ok_or_else(|| null("kernel"))?;
        if index.is_null() && len > 0 {
            return Err(null("index"));
        }
        let idx = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(index, len).to_vec()
        };
        k.0.add_entry(idx, value).map_err(lib_err)
    })
}

/// Kernel from its JSON form `{dim, order, entries, gram?}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_kernel_from_json(json: *const c_char, out: *mut *mut CsKernel) -> CsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CsStatus::Parse, e.to_string()))?;
        let parsed: KernelJson = serde_json::from_str(text).map_err(|e| (CsStatus::Parse, e.to_string()))?;
        let k = parsed.into_kernel().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CsKernel(k)));
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_kernel_free(kernel: *mut CsKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Squared Gram norm of the kernel.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_kernel_norm_sq(kernel: *const CsKernel, out: *mut f64) -> CsStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = k.0.norm_sq();
        Ok(())
    })
}

/// Normal-approximation bound for `I_q(kernel)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_gauss_bound(
    kernel: *const CsKernel,
    q: usize,
    metric: CsMetric,
    out: *mut CsBound,
) -> CsStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rep = gauss_bound_single(&k.0, q, metric.into()).map_err(lib_err)?;
        *out = CsBound::from(&rep);
        Ok(())
    })
}

/// Centered-Gamma-approximation bound for `I_q(kernel)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_gamma_bound(
    kernel: *const CsKernel,
    q: usize,
    nu: f64,
    metric: CsMetric,
    out: *mut CsBound,
) -> CsStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rep = gamma_bound_single(&k.0, q, nu, metric.into()).map_err(lib_err)?;
        *out = CsBound::from(&rep);
        Ok(())
    })
}

/// Exact Kolmogorov bound for the Breuer–Major statistic.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_breuer_major_bound(hurst: f64, q: usize, n: usize, out: *mut CsBound) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = BmInstance::new(hurst, q, n).map_err(lib_err)?;
        let rep = bm_bound_exact(&inst).map_err(lib_err)?;
        *out = CsBound::from(&rep);
        Ok(())
    })
}

/// Writes `count` draws of the Breuer–Major statistic into `out`.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_sample_breuer_major(
    hurst: f64,
    q: usize,
    n: usize,
    count: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < count {
            return Err((CsStatus::BufferTooSmall, format!("need {count} slots, got {out_len}")));
        }
        let batch = sample_Zn(hurst, q, n, count, seed).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, count).copy_from_slice(&batch.values);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::NotPsd("x".into())), CsStatus::NotPsd);
        assert_eq!(status_of(&Error::EmptySample), CsStatus::InvalidArgument);
        assert_eq!(status_of(&Error::Complexity("x".into())), CsStatus::ResourceLimit);
    }

    #[test]
    fn panics_are_contained() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, CsStatus::Panic);
    }
}
