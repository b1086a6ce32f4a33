use std::ffi::{CStr, CString};
use std::ptr;

use bec_oscillator_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bec_last_error_message()) }.to_string_lossy().into_owned()
}

fn coherent(mass: f64, omega0: f64, x: f64, p: f64) -> BecMoments {
    let mut m = BecMoments::default();
    assert_eq!(unsafe { bec_coherent_state(mass, omega0, x, p, &mut m) }, BecStatus::Ok);
    m
}

fn binomial(n: usize, delta: f64) -> *mut BecEnsemble {
    let mut ens = ptr::null_mut();
    assert_eq!(unsafe { bec_binomial_ensemble_new(n, delta, &mut ens) }, BecStatus::Ok);
    assert!(!ens.is_null());
    ens
}

#[test]
fn coherent_state_has_minimal_variances() {
    let (mass, omega0) = (2.0, 3.0);
    let m = coherent(mass, omega0, 0.5, -1.0);
    let var_x = 1.0 / (2.0 * mass * omega0);
    let var_p = mass * omega0 / 2.0;
    assert!((m.mean_x2 - (0.25 + var_x)).abs() < 1e-15);
    assert!((m.mean_p2 - (1.0 + var_p)).abs() < 1e-14);
    assert!((m.mean_xp_sym + 2.0 * 0.5).abs() < 1e-15);
    assert_eq!(last_error(), "");
}

#[test]
fn binomial_entries_are_symmetric_and_normalized() {
    let n = 12;
    let delta = 0.01;
    let ens = binomial(n, delta);
    let mut len = 0;
    assert_eq!(unsafe { bec_ensemble_len(ens, &mut len) }, BecStatus::Ok);
    assert_eq!(len, n + 1);
    let mut total = 0.0;
    for k in 0..len {
        let (mut e, mut w) = (0.0, 0.0);
        assert_eq!(unsafe { bec_ensemble_entry(ens, k, &mut e, &mut w) }, BecStatus::Ok);
        assert!((e - delta * (n as f64 - 2.0 * k as f64)).abs() < 1e-15);
        // C(12, k) / 2^12
        let binom: f64 = (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product();
        assert!((w - binom / 4096.0).abs() < 1e-16);
        total += w;
    }
    assert!((total - 1.0).abs() < 1e-15);
    let (mut e, mut w) = (0.0, 0.0);
    assert_eq!(unsafe { bec_ensemble_entry(ens, len, &mut e, &mut w) }, BecStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));
    unsafe { bec_ensemble_free(ens) };
}

#[test]
fn ensemble_average_after_full_period_with_breathing() {
    // Shifted rotation: every branch returns to its start at τ = 2π.
    let ens = binomial(20, 0.05);
    let init = coherent(1.0, 1.0, 0.0, 2.0);
    let mut out = BecMoments::default();
    let tau = 2.0 * std::f64::consts::PI;
    let status = unsafe { bec_ensemble_average(ens, BEC_COUPLING_POSITION, 1.0, 1.0, tau, &init, &mut out) };
    assert_eq!(status, BecStatus::Ok);
    assert!((out.mean_p - 2.0).abs() < 1e-12);
    assert!(out.mean_x.abs() < 1e-12);
    unsafe { bec_ensemble_free(ens) };
}

#[test]
fn breakup_is_reported() {
    let ens = binomial(10, 0.1);
    let init = coherent(1.0, 1.0, 0.0, 1.0);
    let mut out = BecMoments::default();
    let status =
        unsafe { bec_ensemble_average(ens, BEC_COUPLING_POSITION_SQUARED, 1.0, 1.0, 1.0, &init, &mut out) };
    assert_eq!(status, BecStatus::Breakup);
    assert!(!last_error().is_empty());
    unsafe { bec_ensemble_free(ens) };
}

#[test]
fn null_and_invalid_arguments() {
    let init = coherent(1.0, 1.0, 0.0, 1.0);
    let mut out = BecMoments::default();
    let status =
        unsafe { bec_ensemble_average(ptr::null(), BEC_COUPLING_POSITION, 1.0, 1.0, 0.0, &init, &mut out) };
    assert_eq!(status, BecStatus::NullPointer);
    assert!(last_error().contains("ensemble"));

    let ens = binomial(4, 0.01);
    let status = unsafe { bec_ensemble_average(ens, 9, 1.0, 1.0, 0.0, &init, &mut out) };
    assert_eq!(status, BecStatus::InvalidArgument);
    unsafe { bec_ensemble_free(ens) };

    assert_eq!(unsafe { bec_coherent_state(-1.0, 1.0, 0.0, 0.0, &mut out) }, BecStatus::InvalidArgument);
    assert_eq!(unsafe { bec_coherent_state(1.0, 1.0, 0.0, 0.0, ptr::null_mut()) }, BecStatus::NullPointer);
    let mut f = BecComplex::default();
    assert_eq!(unsafe { bec_f_beta(2, 0.0, 0.1, 1e-10, 1e-8, &mut f, ptr::null_mut()) }, BecStatus::InvalidArgument);
    unsafe {
        bec_ensemble_free(ptr::null_mut());
        bec_scenario_free(ptr::null_mut());
    }
}

#[test]
fn f_beta_at_zero_and_approx() {
    let sigma = 0.1;
    let mut f = BecComplex::default();
    let mut err = f64::NAN;
    assert_eq!(unsafe { bec_f_beta(0, 0.0, sigma, 1e-12, 1e-10, &mut f, &mut err) }, BecStatus::Ok);
    // Normalized density truncated at the breakup edge: Φ(1/σ) = 1 − 7.6e-24.
    assert!((f.re - 1.0).abs() < 1e-10);
    assert!(f.im.abs() < 1e-12);
    assert!(err.is_finite() && err >= 0.0);

    let mut g = BecComplex::default();
    assert_eq!(unsafe { bec_f_beta_gaussian_approx(1.0 / sigma, sigma, &mut g) }, BecStatus::Ok);
    // |f| → exp(−(στ)²/8) as σ → 0 at fixed στ.
    assert!(((g.re * g.re + g.im * g.im).sqrt() - (-0.125f64).exp()).abs() < sigma);
    assert_eq!(unsafe { bec_f_beta_gaussian_approx(0.0, sigma, &mut g) }, BecStatus::Ok);
    assert_eq!((g.re, g.im), (1.0, 0.0));
}

#[test]
fn breakup_mass_matches_normal_tail() {
    let mut mass = 0.0;
    assert_eq!(unsafe { bec_breakup_mass_gaussian(0.25, 1.0, &mut mass) }, BecStatus::Ok);
    // Φ(−1)
    assert!((mass - 0.158_655_253_931_457_05).abs() < 1e-13);
}

#[test]
fn power_law_requires_zero_mean_position() {
    let mut x = 0.0;
    let displaced = coherent(1.0, 1.0, 0.3, 1.0);
    assert_eq!(unsafe { bec_power_law_mean_x(1.0, 1.0, 10.0, 5.0, &displaced, &mut x) }, BecStatus::InvalidArgument);
    let centred = coherent(1.0, 1.0, 0.0, 1.0);
    assert_eq!(unsafe { bec_power_law_mean_x(1.0, 1.0, 0.0, 5.0, &centred, &mut x) }, BecStatus::Ok);
    assert!(x.abs() < 1e-15);
}

#[test]
fn scenario_round_trip_through_files() {
    let doc = CString::new(
        "case = A\nensemble.kind = binomial\nensemble.n_atoms = 16\nensemble.delta_omega = 0.1\n\
         initial.mean_p = 1\ntime_grid.tau_end = 2\ntime_grid.n_points = 5\n",
    )
    .unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { bec_scenario_parse(doc.as_ptr(), &mut sc) }, BecStatus::Ok);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { bec_scenario_run_to_dir(sc, path.as_ptr()) }, BecStatus::Ok);
    unsafe { bec_scenario_free(sc) };
    let csv = std::fs::read_to_string(dir.path().join("discrete.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,mean_x,mean_p,var_x,var_p,cov_xp"));
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn scenario_errors_map_to_codes() {
    let mut sc = ptr::null_mut();
    let bad = CString::new("case = A\nensemble.kind = binomial\n").unwrap();
    assert_eq!(unsafe { bec_scenario_parse(bad.as_ptr(), &mut sc) }, BecStatus::Schema);
    assert!(sc.is_null());
    let incompatible = CString::new(
        "case = A\nmethod = continuum\nensemble.kind = binomial\nensemble.n_atoms = 4\nensemble.delta_omega = 0.1\ntime_grid.tau_end = 1\ntime_grid.n_points = 3\n",
    )
    .unwrap();
    assert_eq!(unsafe { bec_scenario_parse(incompatible.as_ptr(), &mut sc) }, BecStatus::IncompatibleMethod);

    let good = CString::new("case = A\nensemble.kind = binomial\nensemble.n_atoms = 4\nensemble.delta_omega = 0.1\ntime_grid.tau_end = 1\ntime_grid.n_points = 3\n")
        .unwrap();
    assert_eq!(unsafe { bec_scenario_parse(good.as_ptr(), &mut sc) }, BecStatus::Ok);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("f");
    std::fs::write(&blocker, "x").unwrap();
    let target = CString::new(blocker.join("sub").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { bec_scenario_run_to_dir(sc, target.as_ptr()) }, BecStatus::Io);
    unsafe { bec_scenario_free(sc) };
}

#[test]
fn errors_are_per_thread() {
    let mut out = BecMoments::default();
    assert_eq!(unsafe { bec_coherent_state(0.0, 1.0, 0.0, 0.0, &mut out) }, BecStatus::InvalidArgument);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(last_error().contains("mass"));
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(bec_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
