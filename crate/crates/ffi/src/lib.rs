//! C interface to the `specbisect` eigensolver.
//!
//! Matrices and results live behind opaque handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns an
//! [`SbStatus`]; the message of the last failure on the calling thread is
//! available from [`sb_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use specbisect::eigh::{eigh, EighResult};
use specbisect::fparith::{FpMatrix, PrecisionConfig};
use specbisect::primitives::io::{read_matrix, write_matrix};
use specbisect::primitives::{ErrorModel, RngState};
use specbisect::sign::{sign_matrix, SignParams};
use specbisect::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad dimensions, out-of-range values, non-Hermitian input.
    InvalidArgument = 2,
    /// Precision gate or other precondition failed.
    Precondition = 3,
    NonConvergence = 4,
    Invariant = 5,
    AllAttemptsFailed = 6,
    Io = 7,
    Parse = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Opaque matrix of complex configurable-precision entries.
pub struct SbMatrix(FpMatrix);

/// Opaque eigendecomposition `A = U diag(d) U*`.
pub struct SbEigh(EighResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::Range(_) | Error::Dimension(_) | Error::Domain(_) => SbStatus::InvalidArgument,
        Error::Precondition(_) => SbStatus::Precondition,
        Error::NonConvergence(_) => SbStatus::NonConvergence,
        Error::Invariant(_) => SbStatus::Invariant,
        Error::AllAttemptsFailed(_) => SbStatus::AllAttemptsFailed,
        Error::Io(_) => SbStatus::Io,
        Error::Parse(_) => SbStatus::Parse,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SbStatus>) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside specbisect".into());
            SbStatus::Panic
        }
    }
}

fn fail(e: Error) -> SbStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null() -> SbStatus {
    set_error("null pointer argument".into());
    SbStatus::NullPointer
}

fn config(bits: u32) -> Result<PrecisionConfig, SbStatus> {
    PrecisionConfig::new(bits).map_err(fail)
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, SbStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(Error::Parse("path is not valid UTF-8".into())))
}

/// Copies the last error message (NUL-terminated, truncated to `len`)
/// into `buf` and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Builds a `rows x cols` matrix from row-major real and imaginary parts,
/// each rounded to `bits` mantissa bits. `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `rows * cols` doubles; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_from_f64(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    bits: u32,
    out: *mut *mut SbMatrix,
) -> SbStatus {
    guard(|| {
        if re.is_null() || out.is_null() {
            return Err(null());
        }
        let cfg = config(bits)?;
        let k = rows.checked_mul(cols).ok_or_else(|| fail(Error::Dimension("size overflow".into())))?;
        let re = std::slice::from_raw_parts(re, k);
        let entries: Vec<(f64, f64)> = if im.is_null() {
            re.iter().map(|&x| (x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, k);
            re.iter().zip(im).map(|(&a, &b)| (a, b)).collect()
        };
        let m = FpMatrix::from_f64(rows, cols, &entries, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(SbMatrix(m)));
        Ok(())
    })
}

/// Reads a matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_read(path: *const c_char, out: *mut *mut SbMatrix) -> SbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let p = path_arg(path)?;
        let (m, _) = read_matrix(p).map_err(fail)?;
        *out = Box::into_raw(Box::new(SbMatrix(m)));
        Ok(())
    })
}

/// Writes a matrix file (CSV when the name ends in `.csv`).
///
/// # Safety
/// `m` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_write(m: *const SbMatrix, path: *const c_char) -> SbStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(null)?;
        let p = path_arg(path)?;
        write_matrix(p, &m.0, m.0.is_square() && m.0.is_hermitian()).map_err(fail)
    })
}

/// # Safety
/// `m` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_rows(m: *const SbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_cols(m: *const SbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the entries, rounded to double, in row-major order. `im` may be
/// null.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `rows * cols` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_to_f64(m: *const SbMatrix, re: *mut f64, im: *mut f64) -> SbStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(null)?;
        if re.is_null() {
            return Err(null());
        }
        for (k, (a, b)) in m.0.to_f64().into_iter().enumerate() {
            *re.add(k) = a;
            if !im.is_null() {
                *im.add(k) = b;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be null or come from this library, and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sb_matrix_free(m: *mut SbMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Eigendecomposition of the Hermitian matrix `a` to accuracy `eps` with
/// failure probability at most `theta`, in `bits`-bit arithmetic.
///
/// # Safety
/// `a` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_eigh(
    a: *const SbMatrix,
    eps: f64,
    theta: f64,
    seed: u64,
    bits: u32,
    out: *mut *mut SbEigh,
) -> SbStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let cfg = config(bits)?;
        let (res, _) = eigh(&a.0, eps, theta, RngState::new(seed), &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(SbEigh(res)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn sb_eigh_dim(r: *const SbEigh) -> usize {
    r.as_ref().map_or(0, |r| r.0.d.len())
}

/// Copies the eigenvalues, rounded to double.
///
/// # Safety
/// `d` must point to `sb_eigh_dim(r)` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_eigh_values(r: *const SbEigh, d: *mut f64) -> SbStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        if d.is_null() {
            return Err(null());
        }
        for (k, x) in r.0.d_f64().into_iter().enumerate() {
            *d.add(k) = x;
        }
        Ok(())
    })
}

/// Returns a new matrix handle holding the eigenvectors as columns.
///
/// # Safety
/// `r` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_eigh_vectors(r: *const SbEigh, out: *mut *mut SbMatrix) -> SbStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = Box::into_raw(Box::new(SbMatrix(r.0.u.clone())));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or come from this library, and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sb_eigh_free(r: *mut SbEigh) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Matrix sign of a Hermitian `a` with `||a|| <= b` and
/// `||a^-1|| <= a_inv_norm`. `iterations` may be null.
///
/// # Safety
/// `a` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_sign(
    a: *const SbMatrix,
    eps: f64,
    b: f64,
    a_inv_norm: f64,
    bits: u32,
    out: *mut *mut SbMatrix,
    iterations: *mut usize,
) -> SbStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let cfg = config(bits)?;
        let params = SignParams::new(eps, b, a_inv_norm, a.0.rows()).map_err(fail)?;
        let (s, trace) = sign_matrix(&a.0, &params, &cfg).map_err(fail)?;
        if !iterations.is_null() {
            *iterations = trace.iterations;
        }
        *out = Box::into_raw(Box::new(SbMatrix(s)));
        Ok(())
    })
}

/// Mantissa bits sufficient for `eigh` at `(eps, theta, n)` under the
/// default error model; 0 on invalid input.
#[no_mangle]
pub extern "C" fn sb_sufficient_bits(eps: f64, theta: f64, n: usize) -> u32 {
    if !(eps > 0.0 && eps < 1.0 && theta > 0.0 && theta < 1.0 && n >= 2) {
        return 0;
    }
    specbisect::eigh::eigh_precision(eps, theta, n, &ErrorModel::default())
}

/// Mantissa bits below which no backward-stable solver reaches `eps`;
/// 0 on invalid input.
#[no_mangle]
pub extern "C" fn sb_necessary_bits(eps: f64, n: usize) -> u32 {
    if !(eps > 0.0 && eps < 1.0 && n >= 1) {
        return 0;
    }
    specbisect::analysis::necessary_bits(eps, n)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
