//! C ABI for `gl2rep`.
//!
//! Every fallible function returns a [`Gl2Status`]; results go through out
//! pointers. On failure a message is available from
//! [`gl2_last_error_message`] on the same thread. Objects are opaque handles
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gl2rep::growth::zp_cohomology;
use gl2rep::tree::{invariant_dims, required_truncation, PiTruncation};
use gl2rep::weights::{InducedRep, KRep, VerifyOptions, Weight};
use gl2rep::zq::{double_coset_count, Family, SubgroupSpec};
use gl2rep::{Error, FpMatrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gl2Status {
    Ok = 0,
    NullPointer = 1,
    MalformedInput = 2,
    Domain = 3,
    Precision = 4,
    Unsupported = 5,
    Capacity = 6,
    Consistency = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gl2Family {
    K = 0,
    K0 = 1,
    K1 = 2,
    Kn = 3,
    K1pn = 4,
    T1 = 5,
    H = 6,
    Z1 = 7,
}

impl From<Gl2Family> for Family {
    fn from(f: Gl2Family) -> Self {
        match f {
            Gl2Family::K => Family::K,
            Gl2Family::K0 => Family::K0,
            Gl2Family::K1 => Family::K1,
            Gl2Family::Kn => Family::Kn,
            Gl2Family::K1pn => Family::K1pn,
            Gl2Family::T1 => Family::T1,
            Gl2Family::H => Family::H,
            Gl2Family::Z1 => Family::Z1,
        }
    }
}

/// Opaque truncated quotient `π(r, λ, ω^a)^{(m)}`.
pub struct Gl2PiTruncation {
    inner: PiTruncation,
}

/// Opaque matrix over `F_p`.
pub struct Gl2Matrix {
    inner: FpMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> Gl2Status {
    match e {
        Error::MalformedInput(_) => Gl2Status::MalformedInput,
        Error::Domain(_) => Gl2Status::Domain,
        Error::Precision(_) => Gl2Status::Precision,
        Error::Unsupported(_) => Gl2Status::Unsupported,
        Error::Capacity(_) => Gl2Status::Capacity,
        Error::Consistency(_) => Gl2Status::Consistency,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Gl2Status>) -> Gl2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            Gl2Status::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside gl2rep");
            Gl2Status::Panic
        }
    }
}

fn lift<T>(r: gl2rep::Result<T>) -> Result<T, Gl2Status> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Gl2Status> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| {
        set_error("null output pointer");
        Gl2Status::NullPointer
    })
}

fn in_ref<'a, T>(p: *const T) -> Result<&'a T, Gl2Status> {
    // SAFETY: the caller passes either null or a live handle.
    unsafe { p.as_ref() }.ok_or_else(|| {
        set_error("null handle");
        Gl2Status::NullPointer
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gl2_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gl2_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `|K_0(p^n) \ K / K_0(p^n)|`.
#[no_mangle]
pub extern "C" fn gl2_double_coset_count(p: u32, n: u32, out: *mut usize) -> Gl2Status {
    guard(|| {
        let out = out_ptr(out)?;
        *out = lift(double_coset_count(p, n))?;
        Ok(())
    })
}

/// `dim Ind_{K_0(p^n)}^K σ_n` for `σ = Sym^r`.
#[no_mangle]
pub extern "C" fn gl2_induced_dim(p: u32, r: u32, n: u32, out: *mut usize) -> Gl2Status {
    guard(|| {
        let out = out_ptr(out)?;
        let w = lift(Weight::new(p, r, 0))?;
        *out = lift(InducedRep::new(w, n, n + 1))?.dim();
        Ok(())
    })
}

/// Builds `π(r, λ, ω^a)^{(m)}` at precision `precision` (0 selects `m + 3`).
#[no_mangle]
pub extern "C" fn gl2_pi_truncation_new(
    p: u32,
    r: u32,
    lambda: u32,
    a: u32,
    m: u32,
    precision: u32,
    out: *mut *mut Gl2PiTruncation,
) -> Gl2Status {
    guard(|| {
        let out = out_ptr(out)?;
        let w = lift(Weight::new(p, r, a as i64))?;
        let prec = if precision == 0 { m + 3 } else { precision };
        let inner = lift(PiTruncation::new(w, lambda, m, prec))?;
        *out = Box::into_raw(Box::new(Gl2PiTruncation { inner }));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn gl2_pi_truncation_dim(h: *const Gl2PiTruncation, out: *mut usize) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        *out_ptr(out)? = h.inner.dim();
        Ok(())
    })
}

/// `dim R̄_k` inside the truncation.
#[no_mangle]
pub extern "C" fn gl2_pi_truncation_bar_r_dim(h: *const Gl2PiTruncation, k: u32, out: *mut usize) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        let out = out_ptr(out)?;
        *out = lift(h.inner.bar_r_basis(k))?.cols();
        Ok(())
    })
}

/// Invariant dimension under the subgroup `family` of level `n`; the
/// truncation must have `m >= n + 1`.
#[no_mangle]
pub extern "C" fn gl2_invariant_dim(
    h: *const Gl2PiTruncation,
    family: Gl2Family,
    n: u32,
    seed: u64,
    out: *mut usize,
) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        let out = out_ptr(out)?;
        let spec = lift(SubgroupSpec::new(family.into(), n, h.inner.p()))?;
        lift(required_truncation(&spec))?;
        let opts = VerifyOptions {
            seed,
            ..VerifyOptions::default()
        };
        *out = lift(invariant_dims(&h.inner, &spec, &opts, false))?.dim;
        Ok(())
    })
}

/// # Safety
/// `h` is null or a handle from [`gl2_pi_truncation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl2_pi_truncation_free(h: *mut Gl2PiTruncation) {
    if !h.is_null() {
        // SAFETY: `h` came from `gl2_pi_truncation_new` and is freed once.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Copies a row-major `rows x cols` array of residues (reduced mod `p`).
///
/// # Safety
/// `data` points at `rows * cols` readable values, or is null when that
/// product is zero.
#[no_mangle]
pub unsafe extern "C" fn gl2_matrix_new(
    p: u32,
    rows: usize,
    cols: usize,
    data: *const u32,
    out: *mut *mut Gl2Matrix,
) -> Gl2Status {
    guard(|| {
        let out = out_ptr(out)?;
        let len = rows.checked_mul(cols).ok_or_else(|| {
            set_error("matrix size overflows");
            Gl2Status::Capacity
        })?;
        let values = if len == 0 {
            Vec::new()
        } else {
            if data.is_null() {
                set_error("null data pointer");
                return Err(Gl2Status::NullPointer);
            }
            // SAFETY: the caller guarantees `data` points at `rows * cols` values.
            unsafe { std::slice::from_raw_parts(data, len) }.to_vec()
        };
        let p = lift(gl2rep::gf::validate_prime(p as u64))?;
        let values = values.into_iter().map(|x| x % p).collect();
        let inner = lift(FpMatrix::from_vec(p, rows, cols, values))?;
        *out = Box::into_raw(Box::new(Gl2Matrix { inner }));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn gl2_matrix_rank(h: *const Gl2Matrix, out: *mut usize) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        *out_ptr(out)? = h.inner.rank();
        Ok(())
    })
}

/// Dimension of the right kernel.
#[no_mangle]
pub extern "C" fn gl2_matrix_nullity(h: *const Gl2Matrix, out: *mut usize) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        *out_ptr(out)? = h.inner.cols() - h.inner.rank();
        Ok(())
    })
}

/// `(dim H^0, dim H^1)` of `Z_p` acting through the unipotent matrix `h`.
#[no_mangle]
pub extern "C" fn gl2_zp_cohomology(h: *const Gl2Matrix, h0: *mut usize, h1: *mut usize) -> Gl2Status {
    guard(|| {
        let h = in_ref(h)?;
        let (a, b) = lift(zp_cohomology(&h.inner))?;
        *out_ptr(h0)? = a;
        *out_ptr(h1)? = b;
        Ok(())
    })
}

/// # Safety
/// `h` is null or a handle from [`gl2_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl2_matrix_free(h: *mut Gl2Matrix) {
    if !h.is_null() {
        // SAFETY: `h` came from `gl2_matrix_new` and is freed once.
        drop(unsafe { Box::from_raw(h) });
    }
}
