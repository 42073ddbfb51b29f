//! C interface to the correlation-function models: opaque handles, status
//! codes, and flat buffers. Every entry point catches unwinds and reports
//! them as a status instead of crossing the language boundary.
//!
//! The generated header lives at `include/singreg.h`; the build script
//! refreshes it from this file.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use singreg::materials::MaterialRegistry;
use singreg::potentials::PotentialSpec;
use singreg::{CorrelationModel, Error};

use singreg_status::*;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum singreg_status {
    /// The call succeeded.
    SINGREG_OK = 0,
    /// An argument value is outside what the call accepts (e.g. non-finite).
    SINGREG_ERR_INVALID = 1,
    /// The construction collapses identically for these inputs (n = 4).
    SINGREG_ERR_DEGENERATE = 2,
    /// An iterative numeric procedure failed to reach its tolerance.
    SINGREG_ERR_CONVERGENCE = 3,
    /// The input lies outside the domain of the construction (x <= 0, n < 4, ...).
    SINGREG_ERR_DOMAIN = 4,
    /// A required pointer argument is null.
    SINGREG_ERR_NULL = 5,
    /// A string argument is not valid UTF-8.
    SINGREG_ERR_UTF8 = 6,
    /// The material id is not in the built-in registry.
    SINGREG_ERR_UNKNOWN_MATERIAL = 7,
    /// An I/O operation failed.
    SINGREG_ERR_IO = 8,
    /// The library panicked internally; treat the handle as poisoned.
    SINGREG_ERR_INTERNAL = 9,
}

/// Opaque handle to a built correlation model.
pub struct SingregModel {
    inner: CorrelationModel,
}

fn status_of(err: &Error) -> singreg_status {
    match err {
        Error::Domain(_) => SINGREG_ERR_DOMAIN,
        Error::Degenerate(_) => SINGREG_ERR_DEGENERATE,
        Error::Convergence(_) => SINGREG_ERR_CONVERGENCE,
        // the only configuration lookup this interface exposes is the
        // built-in material registry
        Error::Config(_) => SINGREG_ERR_UNKNOWN_MATERIAL,
        Error::Io(_) => SINGREG_ERR_IO,
    }
}

fn guarded(f: impl FnOnce() -> singreg_status) -> singreg_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => SINGREG_ERR_INTERNAL,
    }
}

fn registry() -> &'static MaterialRegistry {
    static REG: OnceLock<MaterialRegistry> = OnceLock::new();
    REG.get_or_init(MaterialRegistry::built_in)
}

fn material_ids() -> &'static [CString] {
    static IDS: OnceLock<Vec<CString>> = OnceLock::new();
    IDS.get_or_init(|| {
        registry()
            .ids()
            .into_iter()
            .map(|id| CString::new(id).expect("material ids contain no NUL"))
            .collect()
    })
}

fn emit(out: *mut *mut SingregModel, model: CorrelationModel) -> singreg_status {
    let handle = Box::into_raw(Box::new(SingregModel { inner: model }));
    unsafe { *out = handle };
    SINGREG_OK
}

/// Build a Lennard-Jones model with coupling `lambda`.
///
/// On success writes a handle to `*out`; release it with
/// `singreg_model_free`.
#[no_mangle]
pub unsafe extern "C" fn singreg_model_lj(
    lambda: f64,
    out: *mut *mut SingregModel,
) -> singreg_status {
    guarded(|| {
        if out.is_null() {
            return SINGREG_ERR_NULL;
        }
        if !lambda.is_finite() {
            return SINGREG_ERR_INVALID;
        }
        match CorrelationModel::build(PotentialSpec::lennard_jones(), lambda) {
            Ok(m) => emit(out, m),
            Err(e) => status_of(&e),
        }
    })
}

/// Build a pure power-law model `v = x^-n` with coupling `lambda`.
///
/// Requires n > 4; n = 4 is degenerate and 2 < n < 4 is outside the domain
/// of the single-factor construction.
#[no_mangle]
pub unsafe extern "C" fn singreg_model_power(
    n: f64,
    lambda: f64,
    out: *mut *mut SingregModel,
) -> singreg_status {
    guarded(|| {
        if out.is_null() {
            return SINGREG_ERR_NULL;
        }
        if !n.is_finite() || !lambda.is_finite() {
            return SINGREG_ERR_INVALID;
        }
        let pspec = match PotentialSpec::power_law(n) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match CorrelationModel::build(pspec, lambda) {
            Ok(m) => emit(out, m),
            Err(e) => status_of(&e),
        }
    })
}

/// Build the model of a built-in material (see `singreg_material_id`).
#[no_mangle]
pub unsafe extern "C" fn singreg_model_for_material(
    id: *const c_char,
    out: *mut *mut SingregModel,
) -> singreg_status {
    guarded(|| {
        if id.is_null() || out.is_null() {
            return SINGREG_ERR_NULL;
        }
        let id = match unsafe { CStr::from_ptr(id) }.to_str() {
            Ok(s) => s,
            Err(_) => return SINGREG_ERR_UTF8,
        };
        match registry().lookup(id).and_then(|m| m.model()) {
            Ok(m) => emit(out, m),
            Err(e) => status_of(&e),
        }
    })
}

/// Release a model handle. A null handle is a no-op.
#[no_mangle]
pub unsafe extern "C" fn singreg_model_free(model: *mut SingregModel) {
    if model.is_null() {
        return;
    }
    let _ = catch_unwind(AssertUnwindSafe(|| {
        drop(unsafe { Box::from_raw(model) });
    }));
}

/// Evaluate the correlation function g at `x > 0` into `*out`.
#[no_mangle]
pub unsafe extern "C" fn singreg_g(
    model: *const SingregModel,
    x: f64,
    out: *mut f64,
) -> singreg_status {
    guarded(|| {
        let model = match unsafe { model.as_ref() } {
            Some(m) => m,
            None => return SINGREG_ERR_NULL,
        };
        if out.is_null() {
            return SINGREG_ERR_NULL;
        }
        match model.inner.g(x) {
            Ok(v) => {
                unsafe { *out = v };
                SINGREG_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Evaluate the regularized potential g*v at `x > 0` into `*out`.
#[no_mangle]
pub unsafe extern "C" fn singreg_phi_reg(
    model: *const SingregModel,
    x: f64,
    out: *mut f64,
) -> singreg_status {
    guarded(|| {
        let model = match unsafe { model.as_ref() } {
            Some(m) => m,
            None => return SINGREG_ERR_NULL,
        };
        if out.is_null() {
            return SINGREG_ERR_NULL;
        }
        match model.inner.phi_reg(x) {
            Ok(v) => {
                unsafe { *out = v };
                SINGREG_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Evaluate g on `len` abscissae from `xs` into `out`.
///
/// With `len == 0` both array pointers may be null. On a non-OK return the
/// prefix of `out` already written is unspecified.
#[no_mangle]
pub unsafe extern "C" fn singreg_g_many(
    model: *const SingregModel,
    xs: *const f64,
    len: usize,
    out: *mut f64,
) -> singreg_status {
    guarded(|| {
        let model = match unsafe { model.as_ref() } {
            Some(m) => m,
            None => return SINGREG_ERR_NULL,
        };
        if len == 0 {
            return SINGREG_OK;
        }
        if xs.is_null() || out.is_null() {
            return SINGREG_ERR_NULL;
        }
        let xs = unsafe { std::slice::from_raw_parts(xs, len) };
        let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (slot, &x) in out.iter_mut().zip(xs) {
            match model.inner.g(x) {
                Ok(v) => *slot = v,
                Err(e) => return status_of(&e),
            }
        }
        SINGREG_OK
    })
}

/// Read the model constants. Every output pointer may be null to skip that
/// value.
#[no_mangle]
pub unsafe extern "C" fn singreg_constants(
    model: *const SingregModel,
    lambda: *mut f64,
    a: *mut f64,
    alpha: *mut f64,
    mu: *mut f64,
    s0: *mut f64,
) -> singreg_status {
    guarded(|| {
        let model = match unsafe { model.as_ref() } {
            Some(m) => m,
            None => return SINGREG_ERR_NULL,
        };
        unsafe {
            if !lambda.is_null() {
                *lambda = model.inner.lambda();
            }
            if !a.is_null() {
                *a = model.inner.a();
            }
            if !alpha.is_null() {
                *alpha = model.inner.alpha();
            }
            if !mu.is_null() {
                *mu = model.inner.mu();
            }
            if !s0.is_null() {
                *s0 = model.inner.s0();
            }
        }
        SINGREG_OK
    })
}

/// Number of built-in materials.
#[no_mangle]
pub extern "C" fn singreg_material_count() -> usize {
    match catch_unwind(|| registry().len()) {
        Ok(n) => n,
        Err(_) => 0,
    }
}

/// Id of the built-in material at `index`, in sorted order, or null when
/// the index is out of range. The string is static; do not free it.
#[no_mangle]
pub extern "C" fn singreg_material_id(index: usize) -> *const c_char {
    match catch_unwind(move || {
        material_ids()
            .get(index)
            .map_or(std::ptr::null(), |id| id.as_ptr())
    }) {
        Ok(p) => p,
        Err(_) => std::ptr::null(),
    }
}

/// Look up the coupling of a built-in material into `*out`.
#[no_mangle]
pub unsafe extern "C" fn singreg_material_lambda(
    id: *const c_char,
    out: *mut f64,
) -> singreg_status {
    guarded(|| {
        if id.is_null() || out.is_null() {
            return SINGREG_ERR_NULL;
        }
        let id = match unsafe { CStr::from_ptr(id) }.to_str() {
            Ok(s) => s,
            Err(_) => return SINGREG_ERR_UTF8,
        };
        match registry().lookup(id) {
            Ok(m) => {
                unsafe { *out = m.lambda };
                SINGREG_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code; never null.
#[no_mangle]
pub extern "C" fn singreg_status_message(status: singreg_status) -> *const c_char {
    let msg: &'static CStr = match status {
        SINGREG_OK => c"ok",
        SINGREG_ERR_INVALID => c"invalid argument value",
        SINGREG_ERR_DEGENERATE => c"construction is degenerate for these inputs",
        SINGREG_ERR_CONVERGENCE => c"numeric procedure failed to converge",
        SINGREG_ERR_DOMAIN => c"input outside the domain of the construction",
        SINGREG_ERR_NULL => c"required pointer is null",
        SINGREG_ERR_UTF8 => c"string is not valid UTF-8",
        SINGREG_ERR_UNKNOWN_MATERIAL => c"material id is not in the registry",
        SINGREG_ERR_IO => c"i/o failure",
        SINGREG_ERR_INTERNAL => c"internal panic",
    };
    msg.as_ptr()
}
