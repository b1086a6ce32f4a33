//! C ABI over `bec-oscillator`.
//!
//! Every function returns a [`BecStatus`]; on failure a description is
//! available from [`bec_last_error_message`] on the same thread. Results are
//! written through out-pointers. Ensembles and scenarios are opaque handles
//! released with their `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use bec_oscillator::continuum::{f_beta, f_beta_gaussian_approx, power_law_mean_x, Beta, QuadratureSpec};
use bec_oscillator::discrete::ensemble_average;
use bec_oscillator::ensemble::{binomial_ensemble, breakup_mass, gaussian_density, truncated_exponential_ensemble};
use bec_oscillator::model::coherent_state_moments;
use bec_oscillator::{parse_scenario, run_scenario, write_outputs, CouplingKind, Error, OscillatorMoments, PhysicalParams, Scenario};

/// Coupling `εX/X₀`.
pub const BEC_COUPLING_POSITION: u32 = 0;
/// Coupling `εX²/X₀²`.
pub const BEC_COUPLING_POSITION_SQUARED: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BecStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Breakup = -3,
    ToleranceNotMet = -4,
    Schema = -5,
    IncompatibleMethod = -6,
    Io = -7,
    Panic = -8,
}

/// Position and momentum moments, in physical units with ħ = 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BecMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub mean_x2: f64,
    pub mean_p2: f64,
    /// `⟨XP + PX⟩`
    pub mean_xp_sym: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BecComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque weighted set of couplings.
pub struct BecEnsemble(bec_oscillator::ensemble::BecEnsemble);

/// Opaque parsed scenario.
pub struct BecScenario(Scenario);

impl From<BecMoments> for OscillatorMoments {
    fn from(m: BecMoments) -> Self {
        OscillatorMoments {
            mean_x: m.mean_x,
            mean_p: m.mean_p,
            mean_x2: m.mean_x2,
            mean_p2: m.mean_p2,
            mean_xp_sym: m.mean_xp_sym,
        }
    }
}

impl From<OscillatorMoments> for BecMoments {
    fn from(m: OscillatorMoments) -> Self {
        BecMoments {
            mean_x: m.mean_x,
            mean_p: m.mean_p,
            mean_x2: m.mean_x2,
            mean_p2: m.mean_p2,
            mean_xp_sym: m.mean_xp_sym,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(BecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter { .. } => BecStatus::InvalidArgument,
            Error::BreakupRegime { .. } => BecStatus::Breakup,
            Error::ToleranceNotMet { .. } => BecStatus::ToleranceNotMet,
            Error::Schema { .. } => BecStatus::Schema,
            Error::IncompatibleMethod { .. } => BecStatus::IncompatibleMethod,
            Error::Io { .. } => BecStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            BecStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {message}"));
            BecStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(BecStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BecStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

fn params(mass: f64, omega0: f64) -> Result<PhysicalParams, Failure> {
    Ok(PhysicalParams::new(mass, omega0)?)
}

fn coupling(kind: u32) -> Result<CouplingKind, Failure> {
    match kind {
        BEC_COUPLING_POSITION => Ok(CouplingKind::Position),
        BEC_COUPLING_POSITION_SQUARED => Ok(CouplingKind::PositionSquared),
        other => Err(Failure(BecStatus::InvalidArgument, format!("unknown coupling kind {other}"))),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn bec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Moments of the coherent state with the given means.
///
/// # Safety
/// `out_moments` must be null or point to writable memory for one `BecMoments`.
#[no_mangle]
pub unsafe extern "C" fn bec_coherent_state(
    mass: f64,
    omega0: f64,
    mean_x: f64,
    mean_p: f64,
    out_moments: *mut BecMoments,
) -> BecStatus {
    guard(|| {
        let out_moments = out(out_moments, "out_moments")?;
        *out_moments = coherent_state_moments(&params(mass, omega0)?, mean_x, mean_p).into();
        Ok(())
    })
}

/// Binomial ensemble with couplings `ε_n = δΩ(N − 2n)`.
///
/// # Safety
/// `out_ensemble` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bec_binomial_ensemble_new(
    n_atoms: usize,
    delta_omega: f64,
    out_ensemble: *mut *mut BecEnsemble,
) -> BecStatus {
    guard(|| {
        let slot = out(out_ensemble, "out_ensemble")?;
        let ens = binomial_ensemble(n_atoms, delta_omega)?;
        *slot = Box::into_raw(Box::new(BecEnsemble(ens)));
        Ok(())
    })
}

/// Weights `∝ exp(−α ω_n)` on the branches with `ε_n ≤ 0`.
///
/// # Safety
/// `out_ensemble` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bec_truncated_exponential_ensemble_new(
    n_atoms: usize,
    delta_omega: f64,
    alpha: f64,
    omega0: f64,
    out_ensemble: *mut *mut BecEnsemble,
) -> BecStatus {
    guard(|| {
        let slot = out(out_ensemble, "out_ensemble")?;
        let ens = truncated_exponential_ensemble(n_atoms, delta_omega, alpha, omega0)?;
        *slot = Box::into_raw(Box::new(BecEnsemble(ens)));
        Ok(())
    })
}

/// Number of branches (`N + 1`).
///
/// # Safety
/// `ensemble` must be null or a live handle; `out_len` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_ensemble_len(ensemble: *const BecEnsemble, out_len: *mut usize) -> BecStatus {
    guard(|| {
        *out(out_len, "out_len")? = input(ensemble, "ensemble")?.0.len();
        Ok(())
    })
}

/// Coupling and weight of branch `index`.
///
/// # Safety
/// `ensemble` must be null or a live handle; the out-pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_ensemble_entry(
    ensemble: *const BecEnsemble,
    index: usize,
    out_epsilon: *mut f64,
    out_weight: *mut f64,
) -> BecStatus {
    guard(|| {
        let ens = &input(ensemble, "ensemble")?.0;
        let (eps, weight) = (out(out_epsilon, "out_epsilon")?, out(out_weight, "out_weight")?);
        let entry = ens.entries().get(index).ok_or_else(|| {
            Failure(BecStatus::InvalidArgument, format!("index {index} out of range for {} branches", ens.len()))
        })?;
        *eps = entry.epsilon;
        *weight = entry.weight;
        Ok(())
    })
}

/// Releases an ensemble. Null is ignored.
///
/// # Safety
/// `ensemble` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bec_ensemble_free(ensemble: *mut BecEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Ensemble-averaged moments at reduced time `tau = ω₀t`.
///
/// # Safety
/// `ensemble` must be null or a live handle; `initial` null or readable;
/// `out_moments` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_ensemble_average(
    ensemble: *const BecEnsemble,
    coupling_kind: u32,
    mass: f64,
    omega0: f64,
    tau: f64,
    initial: *const BecMoments,
    out_moments: *mut BecMoments,
) -> BecStatus {
    guard(|| {
        let ens = &input(ensemble, "ensemble")?.0;
        let init: OscillatorMoments = (*input(initial, "initial")?).into();
        let slot = out(out_moments, "out_moments")?;
        let avg = ensemble_average(ens, coupling(coupling_kind)?, &params(mass, omega0)?, tau, &init)?;
        *slot = avg.into();
        Ok(())
    })
}

/// `f_β(τ; σ)` by adaptive quadrature. `beta` is −1, 0 or 1.
///
/// # Safety
/// Out-pointers must be null or writable; `out_est_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn bec_f_beta(
    beta: i32,
    tau: f64,
    sigma: f64,
    abs_tol: f64,
    rel_tol: f64,
    out_value: *mut BecComplex,
    out_est_error: *mut f64,
) -> BecStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let spec = QuadratureSpec { abs_tol, rel_tol, ..QuadratureSpec::default() };
        let r = f_beta(Beta::try_from(beta)?, tau, sigma, &spec)?;
        *slot = BecComplex { re: r.value.re, im: r.value.im };
        if let Some(e) = out_est_error.as_mut() {
            *e = r.est_error;
        }
        Ok(())
    })
}

/// Weak-coupling approximation of `f_β`, independent of β.
///
/// # Safety
/// `out_value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_f_beta_gaussian_approx(tau: f64, sigma: f64, out_value: *mut BecComplex) -> BecStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let v = f_beta_gaussian_approx(tau, sigma)?;
        *slot = BecComplex { re: v.re, im: v.im };
        Ok(())
    })
}

/// Power-law mean position at physical time `t`; requires `⟨X(0)⟩ = 0`.
///
/// # Safety
/// `initial` must be null or readable; `out_mean_x` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_power_law_mean_x(
    mass: f64,
    omega0: f64,
    t: f64,
    alpha: f64,
    initial: *const BecMoments,
    out_mean_x: *mut f64,
) -> BecStatus {
    guard(|| {
        let init: OscillatorMoments = (*input(initial, "initial")?).into();
        let slot = out(out_mean_x, "out_mean_x")?;
        *slot = power_law_mean_x(&params(mass, omega0)?, t, alpha, &init)?;
        Ok(())
    })
}

/// Mass of the Gaussian coupling density `N(0, κ²)` below `−ω₀/4`.
///
/// # Safety
/// `out_mass` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_breakup_mass_gaussian(kappa: f64, omega0: f64, out_mass: *mut f64) -> BecStatus {
    guard(|| {
        let slot = out(out_mass, "out_mass")?;
        *slot = breakup_mass(&gaussian_density(kappa)?, omega0)?;
        Ok(())
    })
}

/// Parses a scenario document.
///
/// # Safety
/// `document` must be null or a NUL-terminated string; `out_scenario` null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn bec_scenario_parse(document: *const c_char, out_scenario: *mut *mut BecScenario) -> BecStatus {
    guard(|| {
        let slot = out(out_scenario, "out_scenario")?;
        let s = parse_scenario(text(document, "document")?)?;
        *slot = Box::into_raw(Box::new(BecScenario(s)));
        Ok(())
    })
}

/// Runs a scenario and writes one CSV per method plus `manifest.txt` into
/// `out_dir`.
///
/// # Safety
/// `scenario` must be null or a live handle; `out_dir` null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bec_scenario_run_to_dir(scenario: *const BecScenario, out_dir: *const c_char) -> BecStatus {
    guard(|| {
        let s = &input(scenario, "scenario")?.0;
        let dir = text(out_dir, "out_dir")?;
        let output = run_scenario(s)?;
        write_outputs(&output, Path::new(dir))?;
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bec_scenario_free(scenario: *mut BecScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}
