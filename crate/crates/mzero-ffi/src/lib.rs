//! C ABI for the `mzero` toolkit.
//!
//! Systems are passed around as opaque [`MzSystem`] handles created by
//! [`mz_system_parse`] and released with [`mz_system_free`]. Every fallible
//! function returns an [`MzStatus`]; on failure a human-readable message is
//! available from [`mz_last_error_message`] on the same thread. No function
//! unwinds across the boundary: panics are caught and reported as
//! [`MzStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use mzero::certify::{certify_cluster, separation_bound, CertifyOptions};
use mzero::dualspace::{compute_dual_basis, DualOptions};
use mzero::newton::{iterate_until, threshold_constants, Algorithm, Variant};
use mzero::numkit::NormRequest;
use mzero::polycore::{parse_system, PolySystem};
use mzero::{MzError, C64};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MzStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The system text could not be parsed.
    Syntax = 3,
    /// Any other input error (dimensions, arguments, non-finite values).
    InvalidInput = 4,
    /// A numerical-domain failure (singular Jacobian, wrong corank, …).
    Numerical = 5,
    /// An internal panic was caught.
    Panic = 6,
}

/// Opaque handle to a parsed polynomial system.
pub struct MzSystem {
    inner: Arc<PolySystem>,
}

/// A complex number.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MzComplex {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

/// Summary of a cluster certificate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MzCertificate {
    /// Multiplicity used.
    pub mu: usize,
    /// Radius `d/(4γ_μ^μ)` of the certified ball.
    pub radius: f64,
    /// Left-hand side of the certificate inequality.
    pub lhs: f64,
    /// Right-hand side of the certificate inequality.
    pub rhs: f64,
    /// `‖f(x)‖`.
    pub residual_norm: f64,
    /// `γ_μ` of the truncated system.
    pub gamma: f64,
    /// 1 if `lhs < rhs` (the ball contains `μ` zeros), else 0.
    pub holds: i32,
}

/// Convergence thresholds of one iteration variant.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MzThresholds {
    /// Multiplicity the variant applies to.
    pub mu: usize,
    /// Threshold below which the error decreases.
    pub u_converge: f64,
    /// Threshold below which the error contracts quadratically.
    pub u_quadratic: f64,
}

/// Variant code for [`mz_thresholds`]: double zero, normalized form.
pub const MZ_VARIANT_NORMALIZED_DOUBLE: i32 = 0;
/// Variant code for [`mz_thresholds`]: triple zero, normalized form.
pub const MZ_VARIANT_NORMALIZED_TRIPLE: i32 = 1;
/// Variant code for [`mz_thresholds`]: triple zero, self-normalizing.
pub const MZ_VARIANT_GENERAL_TRIPLE: i32 = 2;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &MzError) -> MzStatus {
    match e {
        MzError::Syntax { .. } | MzError::NonSquare { .. } => MzStatus::Syntax,
        e if e.is_input_error() => MzStatus::InvalidInput,
        _ => MzStatus::Numerical,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (MzStatus, String)>) -> MzStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MzStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MzStatus::Panic
        }
    }
}

fn lib_err(e: MzError) -> (MzStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (MzStatus, String) {
    (MzStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `sys` must be null or a live handle from [`mz_system_parse`].
unsafe fn system_ref<'a>(sys: *const MzSystem) -> Result<&'a MzSystem, (MzStatus, String)> {
    sys.as_ref().ok_or_else(|| null_err("system"))
}

/// # Safety
/// `point` must be null or valid for reads of `len` elements.
unsafe fn point_vec(sys: &MzSystem, point: *const MzComplex, len: usize) -> Result<Vec<C64>, (MzStatus, String)> {
    if point.is_null() {
        return Err(null_err("point"));
    }
    let n = sys.inner.nvars();
    if len != n {
        return Err(lib_err(MzError::DimensionMismatch { expected: n, got: len }));
    }
    let slice = std::slice::from_raw_parts(point, len);
    let v: Vec<C64> = slice.iter().map(|c| C64::new(c.re, c.im)).collect();
    sys.inner.check_point(&v).map_err(lib_err)?;
    Ok(v)
}

fn request(certified: i32) -> NormRequest {
    if certified != 0 {
        NormRequest::Certified
    } else {
        NormRequest::Estimate
    }
}

/// Parses a system from NUL-terminated text and stores a new handle in
/// `*out` (set to null on failure).
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn mz_system_parse(text: *const c_char, out: *mut *mut MzSystem) -> MzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null_err("text"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|e| (MzStatus::InvalidUtf8, e.to_string()))?;
        let sys = parse_system(s).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MzSystem { inner: Arc::new(sys) }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle from [`mz_system_parse`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn mz_system_free(sys: *mut MzSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of variables (0 for a null handle).
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mz_system_nvars(sys: *const MzSystem) -> usize {
    sys.as_ref().map(|s| s.inner.nvars()).unwrap_or(0)
}

/// Multiplicity of the simple multiple zero at `point` (length `len`),
/// detected from the breadth-one dual basis.
///
/// # Safety
/// Pointers must be valid: `point` for `len` reads, `mu_out` for a write.
#[no_mangle]
pub unsafe extern "C" fn mz_multiplicity(
    sys: *const MzSystem,
    point: *const MzComplex,
    len: usize,
    mu_out: *mut usize,
) -> MzStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if mu_out.is_null() {
            return Err(null_err("mu_out"));
        }
        let x = point_vec(s, point, len)?;
        let b = compute_dual_basis(s.inner.as_ref(), &x, &DualOptions::default()).map_err(lib_err)?;
        *mu_out = b.mu;
        Ok(())
    })
}

/// Local separation bound `d/(2γ_μ^μ)` at a zero of multiplicity `mu`.
/// `certified` selects Frobenius bounds (non-zero) or power-method
/// estimates (zero) for tensors without an exact norm.
///
/// # Safety
/// Pointers must be valid: `point` for `len` reads, `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn mz_separation_bound(
    sys: *const MzSystem,
    point: *const MzComplex,
    len: usize,
    mu: usize,
    certified: i32,
    out: *mut f64,
) -> MzStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let x = point_vec(s, point, len)?;
        let r = separation_bound(s.inner.as_ref(), &x, mu, request(certified)).map_err(lib_err)?;
        *out = r.bound;
        Ok(())
    })
}

/// Cluster certificate at an approximate zero of multiplicity `mu`. A
/// negative certificate (`holds == 0`) is still [`MzStatus::Ok`].
///
/// # Safety
/// Pointers must be valid: `point` for `len` reads, `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn mz_certify(
    sys: *const MzSystem,
    point: *const MzComplex,
    len: usize,
    mu: usize,
    certified: i32,
    out: *mut MzCertificate,
) -> MzStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let x = point_vec(s, point, len)?;
        let opts = CertifyOptions { request: request(certified), ..CertifyOptions::default() };
        let c = certify_cluster(s.inner.as_ref(), &x, mu, &opts).map_err(lib_err)?;
        *out = MzCertificate {
            mu: c.mu,
            radius: c.radius,
            lhs: c.lhs,
            rhs: c.rhs,
            residual_norm: c.residual_norm,
            gamma: c.gamma_on_g.gamma,
            holds: i32::from(c.holds),
        };
        Ok(())
    })
}

/// Refines an approximate zero of multiplicity `mu` with the
/// self-normalizing modified Newton iteration. Writes the final iterate to
/// `out_point` (length `len`), the number of iterations to `iterations`,
/// and 1/0 to `converged`. Non-convergence is not an error.
///
/// # Safety
/// Pointers must be valid: `point` for `len` reads, `out_point` for `len`
/// writes, `iterations` and `converged` for a write each.
#[no_mangle]
pub unsafe extern "C" fn mz_refine(
    sys: *const MzSystem,
    point: *const MzComplex,
    len: usize,
    mu: usize,
    eps: f64,
    max_iter: usize,
    out_point: *mut MzComplex,
    iterations: *mut usize,
    converged: *mut i32,
) -> MzStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if out_point.is_null() || iterations.is_null() || converged.is_null() {
            return Err(null_err("output pointer"));
        }
        let x = point_vec(s, point, len)?;
        let t = iterate_until(&s.inner, &x, mu, Algorithm::General, eps, max_iter).map_err(lib_err)?;
        let out = std::slice::from_raw_parts_mut(out_point, len);
        for (o, c) in out.iter_mut().zip(t.last()) {
            *o = MzComplex { re: c.re, im: c.im };
        }
        *iterations = t.iterates.len() - 1;
        *converged = i32::from(t.converged);
        Ok(())
    })
}

/// Convergence thresholds of a variant (`MZ_VARIANT_*`).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mz_thresholds(variant: i32, out: *mut MzThresholds) -> MzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let v = match variant {
            MZ_VARIANT_NORMALIZED_DOUBLE => Variant::NormalizedDouble,
            MZ_VARIANT_NORMALIZED_TRIPLE => Variant::NormalizedTriple,
            MZ_VARIANT_GENERAL_TRIPLE => Variant::GeneralTriple,
            other => return Err((MzStatus::InvalidInput, format!("unknown variant code {other}"))),
        };
        let t = threshold_constants(v).map_err(lib_err)?;
        *out = MzThresholds { mu: t.mu, u_converge: t.u_converge, u_quadratic: t.u_quadratic };
        Ok(())
    })
}

/// Message of the last failure on this thread, or null if the last call
/// succeeded. The pointer stays valid until the next call into this
/// library on the same thread.
#[no_mangle]
pub extern "C" fn mz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null()))
}
