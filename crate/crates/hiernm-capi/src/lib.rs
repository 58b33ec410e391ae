//! C ABI over the hiernm simulator.
//!
//! Foreign callers work with opaque handles (`HiernmParams`,
//! `HiernmPropagator`) created and destroyed here, and every fallible call
//! returns a [`HiernmStatus`] code with results written through out
//! pointers. The C `INFINITY` value for `lambda` selects the memoryless
//! reservoir, matching the `inf` spelling of the CLI.
//!
//! The generated header lands in `include/hiernm.h` at build time.

use std::ffi::{c_char, c_int};

use hiernm::model::{PhysParams, SpectralWidth};
use hiernm::nm::{choose_horizon, nm_for_propagator};
use hiernm::phase::{nm_direct_auto, threshold_kappa, DEFAULT_TOL};
use hiernm::propagator::Propagator;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiernmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    /// The operation needs a finite spectral width.
    InfiniteWidth = 3,
    /// Degenerate (triple) poles at this parameter point.
    DegeneratePoles = 4,
    /// Threshold bracket does not straddle the transition.
    Bracket = 5,
    Internal = 6,
}

fn status_of(e: &hiernm::Error) -> HiernmStatus {
    use hiernm::Error::*;
    match e {
        InvalidParams(_) | NonFinite { .. } | FiniteWidth => HiernmStatus::InvalidParams,
        InfiniteWidth { .. } => HiernmStatus::InfiniteWidth,
        TripleRoot { .. } => HiernmStatus::DegeneratePoles,
        Bracket { .. } => HiernmStatus::Bracket,
        UnphysicalPropagator { .. }
        | Internal { .. }
        | IntegratorOrder { .. }
        | NormConservation { .. }
        | Io(_) => HiernmStatus::Internal,
    }
}

/// Opaque model-parameter handle.
pub struct HiernmParams {
    inner: PhysParams,
}

/// Opaque propagator handle: evaluates G(t) for one parameter point.
pub struct HiernmPropagator {
    prop: Propagator,
}

fn width_from(lambda: f64) -> Result<SpectralWidth, HiernmStatus> {
    if lambda.is_nan() {
        return Err(HiernmStatus::InvalidParams);
    }
    if lambda.is_infinite() {
        if lambda > 0.0 {
            Ok(SpectralWidth::Infinite)
        } else {
            Err(HiernmStatus::InvalidParams)
        }
    } else if lambda > 0.0 {
        Ok(SpectralWidth::Finite(lambda))
    } else {
        Err(HiernmStatus::InvalidParams)
    }
}

/// Create a parameter handle. `lambda = INFINITY` selects the memoryless
/// reservoir. On success writes the handle through `out` and returns `Ok`.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle must be released with
/// `hiernm_params_free`.
#[no_mangle]
pub unsafe extern "C" fn hiernm_params_new(
    kappa: f64,
    lambda: f64,
    gamma: f64,
    out: *mut *mut HiernmParams,
) -> HiernmStatus {
    if out.is_null() {
        return HiernmStatus::NullPointer;
    }
    let width = match width_from(lambda) {
        Ok(w) => w,
        Err(s) => return s,
    };
    match PhysParams::new(kappa, width, gamma) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(HiernmParams { inner }));
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a parameter handle. Null is a no-op.
///
/// # Safety
/// `params` must have come from `hiernm_params_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn hiernm_params_free(params: *mut HiernmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Build the propagator for a parameter point (Laplace inversion for finite
/// width, the closed form for the memoryless sentinel).
///
/// # Safety
/// `params` and `out` must be valid pointers; the result must be released
/// with `hiernm_propagator_free`.
#[no_mangle]
pub unsafe extern "C" fn hiernm_propagator_new(
    params: *const HiernmParams,
    out: *mut *mut HiernmPropagator,
) -> HiernmStatus {
    if params.is_null() || out.is_null() {
        return HiernmStatus::NullPointer;
    }
    let p = &(*params).inner;
    match Propagator::for_params(p) {
        Ok(prop) => {
            *out = Box::into_raw(Box::new(HiernmPropagator { prop }));
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a propagator handle. Null is a no-op.
///
/// # Safety
/// `prop` must have come from `hiernm_propagator_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn hiernm_propagator_free(prop: *mut HiernmPropagator) {
    if !prop.is_null() {
        drop(Box::from_raw(prop));
    }
}

/// Evaluate G(t). Fails for t < 0 or on internal consistency violations.
///
/// # Safety
/// `prop` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hiernm_propagator_eval(
    prop: *const HiernmPropagator,
    t: f64,
    out: *mut f64,
) -> HiernmStatus {
    if prop.is_null() || out.is_null() {
        return HiernmStatus::NullPointer;
    }
    match (*prop).prop.eval(t) {
        Ok(g) => {
            *out = g;
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Non-Markovianity of a parameter point for the optimal initial pair.
/// `horizon <= 0` selects the automatic envelope policy. Writes the measure
/// through `out_nm` and the classification (1 = Markovian) through
/// `out_markovian`; either may be null when not wanted.
///
/// # Safety
/// `params` must be a valid handle; non-null out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hiernm_nm(
    params: *const HiernmParams,
    horizon: f64,
    out_nm: *mut f64,
    out_markovian: *mut c_int,
) -> HiernmStatus {
    if params.is_null() {
        return HiernmStatus::NullPointer;
    }
    let p = &(*params).inner;
    let result = (|| {
        let prop = Propagator::for_params(p)?;
        let h = if horizon > 0.0 {
            horizon
        } else {
            choose_horizon(&prop, p.gamma())
        };
        nm_for_propagator(&prop, p.gamma(), h)
    })();
    match result {
        Ok(r) => {
            if !out_nm.is_null() {
                *out_nm = r.nm_value;
            }
            if !out_markovian.is_null() {
                *out_markovian = r.markovian as c_int;
            }
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Non-Markovianity of the direct-coupling comparison model (qubit straight
/// into the reservoir, kernel kappa^2 e^{-lambda |t-s|}).
///
/// # Safety
/// Non-null out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hiernm_nm_direct(
    kappa: f64,
    lambda: f64,
    out_nm: *mut f64,
    out_markovian: *mut c_int,
) -> HiernmStatus {
    match nm_direct_auto(kappa, lambda) {
        Ok(r) => {
            if !out_nm.is_null() {
                *out_nm = r.nm_value;
            }
            if !out_markovian.is_null() {
                *out_markovian = r.markovian as c_int;
            }
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Markovian/non-Markovian threshold coupling at the given spectral width
/// (INFINITY for the memoryless reservoir), bisected to width `tol`
/// (`tol <= 0` selects the default 1e-4 gamma).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hiernm_threshold_kappa(
    lambda: f64,
    gamma: f64,
    tol: f64,
    out: *mut f64,
) -> HiernmStatus {
    if out.is_null() {
        return HiernmStatus::NullPointer;
    }
    let width = match width_from(lambda) {
        Ok(w) => w,
        Err(s) => return s,
    };
    if !(gamma.is_finite() && gamma > 0.0) {
        return HiernmStatus::InvalidParams;
    }
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL * gamma };
    match threshold_kappa(width, gamma, None, tol) {
        Ok(kappa_t) => {
            *out = kappa_t;
            HiernmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn hiernm_status_message(status: HiernmStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        HiernmStatus::Ok => b"ok\0",
        HiernmStatus::NullPointer => b"null pointer argument\0",
        HiernmStatus::InvalidParams => b"invalid parameters\0",
        HiernmStatus::InfiniteWidth => b"operation needs a finite spectral width\0",
        HiernmStatus::DegeneratePoles => b"degenerate (triple) poles at this parameter point\0",
        HiernmStatus::Bracket => b"bracket does not straddle the transition\0",
        HiernmStatus::Internal => b"internal consistency failure\0",
    };
    msg.as_ptr() as *const c_char
}
