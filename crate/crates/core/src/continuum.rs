//! Irreversible-limit dynamics.
//!
//! With quadratic coupling and a Gaussian spread of couplings, the branch
//! frequencies are `ω = ω₀ sqrt(1 + z)` with `z ~ N(0, σ²)`, `σ = 4κ/ω₀`, and
//! the mean position and momentum reduce to
//!
//! ```text
//! f_β(τ; σ) = (2πσ²)^(-1/2) ∫_{-1}^{∞} dz e^{-z²/2σ²} e^{iτ sqrt(1+z)} (1+z)^(-β/2)
//! ```
//!
//! for `β ∈ {−1, 0, 1}`. Substituting `w = sqrt(1 + z)` gives an integrand
//! `2 w^{1−β} e^{−(w²−1)²/2σ²} e^{iτw}` on `[0, ∞)` that is bounded for every
//! `β`, which is what [`f_beta`] integrates. Branches with `z < −1` (the
//! breakup regime) are dropped from the integral without renormalizing.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{nondimensionalize, redimensionalize, OscillatorMoments, PhysicalParams};
use crate::numeric::normal_cdf;
use crate::quadrature::{integrate, Integral, Tolerance};

/// Gaussian exponent `(w² − 1)²/2σ²` at which the integrand is truncated.
pub const TRUNCATION_EXPONENT: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Minimum number of panels per period of the oscillating phase.
    pub oscillation_resolution: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 50_000, oscillation_resolution: 16 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", format!("must be positive, got {}", self.abs_tol)));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol", format!("must be positive, got {}", self.rel_tol)));
        }
        if self.oscillation_resolution < 4 {
            return Err(Error::invalid("oscillation_resolution", "must be at least 4"));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol }
    }
}

/// The exponent index β of `(1 + z)^(-β/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Beta {
    MinusOne,
    Zero,
    PlusOne,
}

impl Beta {
    pub const ALL: [Beta; 3] = [Beta::MinusOne, Beta::Zero, Beta::PlusOne];

    pub fn value(self) -> i32 {
        match self {
            Beta::MinusOne => -1,
            Beta::Zero => 0,
            Beta::PlusOne => 1,
        }
    }

    /// `w^{−β}`
    fn weight(self, w: f64) -> f64 {
        match self {
            Beta::MinusOne => w,
            Beta::Zero => 1.0,
            Beta::PlusOne => w.recip(),
        }
    }
}

impl TryFrom<i32> for Beta {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(Beta::MinusOne),
            0 => Ok(Beta::Zero),
            1 => Ok(Beta::PlusOne),
            _ => Err(Error::invalid("beta", format!("must be -1, 0 or 1, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FBetaResult {
    pub value: Complex64,
    /// Quadrature estimate plus a bound on the truncated tail.
    pub est_error: f64,
    pub beta: Beta,
    pub tau: f64,
    pub sigma: f64,
}

/// `σ = 4κ/ω₀`
pub fn sigma_from_kappa(kappa: f64, omega0: f64) -> f64 {
    4.0 * kappa / omega0
}

/// Upper limit `w_max` where `(w² − 1)²/2σ²` reaches [`TRUNCATION_EXPONENT`].
pub fn truncation_limit(sigma: f64) -> f64 {
    (1.0 + sigma * (2.0 * TRUNCATION_EXPONENT).sqrt()).sqrt()
}

/// Bound on `∫_{w_max}^∞ ρ(w) w^{−β} dw` for every β: the normal tail beyond
/// `c = sqrt(2·60)` plus the first-moment correction from `w ≤ 1 + z/2`.
fn truncation_bound(sigma: f64) -> f64 {
    let c = (2.0 * TRUNCATION_EXPONENT).sqrt();
    normal_cdf(-c) + 0.5 * sigma * (-0.5 * c * c).exp() / (2.0 * PI).sqrt()
}

/// Density of `w = sqrt(1 + z)` for `z ~ N(0, σ²)`, restricted to `w ≥ 0`.
fn w_density(w: f64, sigma: f64) -> f64 {
    let u = (w * w - 1.0) / sigma;
    2.0 * w * (-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt())
}

fn check_sigma_tau(tau: f64, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive and finite, got {sigma}")));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid("tau", format!("must be finite and non-negative, got {tau}")));
    }
    Ok(())
}

/// Panels needed so that no panel exceeds `2π/(resolution·frequency)` in `w`
/// nor half the width of the Gaussian peak.
fn initial_panels(w_max: f64, frequency: f64, sigma: f64, resolution: usize) -> usize {
    let by_phase = (w_max * frequency * resolution as f64 / (2.0 * PI)).ceil();
    let by_peak = (2.0 * w_max / sigma).ceil();
    by_phase.max(by_peak).max(8.0) as usize
}

fn integrate_w<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    frequency: f64,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<Integral<K>> {
    spec.validate()?;
    let w_max = truncation_limit(sigma);
    let panels = initial_panels(w_max, frequency, sigma, spec.oscillation_resolution);
    integrate(f, 0.0, w_max, panels, spec.tolerance(), spec.max_subdivisions)
}

/// Evaluates `f_β(τ; σ)` by adaptive quadrature in `w = sqrt(1 + z)`.
pub fn f_beta(beta: Beta, tau: f64, sigma: f64, spec: &QuadratureSpec) -> Result<FBetaResult> {
    check_sigma_tau(tau, sigma)?;
    let integral = integrate_w(
        |w| {
            let weight = w_density(w, sigma) * beta.weight(w);
            let (s, c) = (tau * w).sin_cos();
            [weight * c, weight * s]
        },
        tau,
        sigma,
        spec,
    )?;
    Ok(FBetaResult {
        value: Complex64::new(integral.value[0], integral.value[1]),
        est_error: integral.est_error + truncation_bound(sigma),
        beta,
        tau,
        sigma,
    })
}

/// Weak-coupling form `(1 + iτσ²/4)^(-1/2) exp(−τ²σ²/(8 + 2iσ²τ)) e^{iτ}`,
/// valid to `O(σ)` and independent of β.
pub fn f_beta_gaussian_approx(tau: f64, sigma: f64) -> Result<Complex64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive and finite, got {sigma}")));
    }
    if !tau.is_finite() {
        return Err(Error::invalid("tau", "must be finite"));
    }
    let s2 = sigma * sigma;
    let prefactor = Complex64::new(1.0, tau * s2 / 4.0).sqrt().inv();
    let exponent = -Complex64::new(tau * tau * s2, 0.0) / Complex64::new(8.0, 2.0 * s2 * tau);
    Ok(prefactor * exponent.exp() * Complex64::from_polar(1.0, tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FBetaBackend {
    Quadrature(QuadratureSpec),
    GaussianApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumMeans {
    pub mean_x: f64,
    pub mean_p: f64,
    /// Error estimate in reduced units (zero for the approximate backend,
    /// whose `O(σ)` bias is not an estimate).
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumSecondMoments {
    pub mean_x2: f64,
    pub mean_p2: f64,
    pub mean_xp_sym: f64,
    /// Error estimate in reduced units.
    pub est_error: f64,
}

/// Mean position and momentum under quadratic coupling with a Gaussian
/// coupling density:
/// `⟨X⟩ = ⟨X(0)⟩ Re f₀ + ⟨P(0)⟩/(mω₀) Im f₁`,
/// `⟨P⟩ = ⟨P(0)⟩ Re f₀ − mω₀⟨X(0)⟩ Im f₋₁`.
pub fn continuum_means(
    params: &PhysicalParams,
    tau: f64,
    sigma: f64,
    init: &OscillatorMoments,
    backend: &FBetaBackend,
) -> Result<ContinuumMeans> {
    check_sigma_tau(tau, sigma)?;
    let r = nondimensionalize(params, init);
    let (f0, f1, fm1, err) = match backend {
        FBetaBackend::Quadrature(spec) => {
            let f0 = f_beta(Beta::Zero, tau, sigma, spec)?;
            let f1 = f_beta(Beta::PlusOne, tau, sigma, spec)?;
            let fm1 = f_beta(Beta::MinusOne, tau, sigma, spec)?;
            let err = (r.mean_x.abs() + r.mean_p.abs()) * f0.est_error
                + r.mean_p.abs() * f1.est_error
                + r.mean_x.abs() * fm1.est_error;
            (f0.value, f1.value, fm1.value, err)
        }
        FBetaBackend::GaussianApprox => {
            let f = f_beta_gaussian_approx(tau, sigma)?;
            (f, f, f, 0.0)
        }
    };
    let reduced = OscillatorMoments {
        mean_x: r.mean_x * f0.re + r.mean_p * f1.im,
        mean_p: r.mean_p * f0.re - r.mean_x * fm1.im,
        ..Default::default()
    };
    let physical = redimensionalize(params, &reduced);
    Ok(ContinuumMeans { mean_x: physical.mean_x, mean_p: physical.mean_p, est_error: err })
}

/// Reduced second moments of one branch at frequency ratio `w`, written with
/// kernels that stay bounded as `w → 0`.
fn branch_second_moments(r: &OscillatorMoments, w: f64, tau: f64) -> [f64; 3] {
    let s1 = (w * tau).sin();
    let (s2, c2) = (2.0 * w * tau).sin_cos();
    // sin(wτ)/w and sin(2wτ)/w, finite at w = 0
    let sinc1 = if w == 0.0 { tau } else { s1 / w };
    let sinc2 = if w == 0.0 { 2.0 * tau } else { s2 / w };
    let x2 = 0.5 * r.mean_xp_sym * sinc2 + r.mean_p2 * sinc1 * sinc1 + 0.5 * r.mean_x2 * (1.0 + c2);
    let p2 = -0.5 * r.mean_xp_sym * w * s2 + 0.5 * r.mean_p2 * (1.0 + c2) + r.mean_x2 * w * w * s1 * s1;
    let sym = -r.mean_x2 * w * s2 + r.mean_p2 * sinc2 + r.mean_xp_sym * c2;
    [x2, p2, sym]
}

/// `⟨X²⟩`, `⟨P²⟩` and `⟨XP + PX⟩` in the same limit as [`continuum_means`],
/// integrating each branch's closed-form second moments against the coupling
/// density.
pub fn continuum_second_moments(
    params: &PhysicalParams,
    tau: f64,
    sigma: f64,
    init: &OscillatorMoments,
    backend: &FBetaBackend,
) -> Result<ContinuumSecondMoments> {
    check_sigma_tau(tau, sigma)?;
    let r = nondimensionalize(params, init);
    let (values, err) = match backend {
        FBetaBackend::Quadrature(spec) => {
            let integral = integrate_w(
                |w| {
                    let rho = w_density(w, sigma);
                    branch_second_moments(&r, w, tau).map(|v| rho * v)
                },
                2.0 * tau,
                sigma,
                spec,
            )?;
            let scale = r.mean_x2.abs() + r.mean_p2.abs() + r.mean_xp_sym.abs();
            (integral.value, integral.est_error + scale * truncation_bound(sigma) * (1.0 + tau * tau))
        }
        FBetaBackend::GaussianApprox => {
            // Leading order: branch prefactors w^{±1}, w^{±2} → 1 and the
            // phase average e^{2iwτ} → f(2τ).
            let f = f_beta_gaussian_approx(2.0 * tau, sigma)?;
            let x2 = 0.5 * r.mean_xp_sym * f.im + 0.5 * r.mean_p2 * (1.0 - f.re) + 0.5 * r.mean_x2 * (1.0 + f.re);
            let p2 = -0.5 * r.mean_xp_sym * f.im + 0.5 * r.mean_p2 * (1.0 + f.re) + 0.5 * r.mean_x2 * (1.0 - f.re);
            let sym = (r.mean_p2 - r.mean_x2) * f.im + r.mean_xp_sym * f.re;
            ([x2, p2, sym], 0.0)
        }
    };
    let physical = redimensionalize(
        params,
        &OscillatorMoments { mean_x2: values[0], mean_p2: values[1], mean_xp_sym: values[2], ..Default::default() },
    );
    Ok(ContinuumSecondMoments {
        mean_x2: physical.mean_x2,
        mean_p2: physical.mean_p2,
        mean_xp_sym: physical.mean_xp_sym,
        est_error: err,
    })
}

/// All five continuum moments with a combined error estimate (reduced units).
pub fn continuum_moments(
    params: &PhysicalParams,
    tau: f64,
    sigma: f64,
    init: &OscillatorMoments,
    backend: &FBetaBackend,
) -> Result<(OscillatorMoments, f64)> {
    let means = continuum_means(params, tau, sigma, init, backend)?;
    let second = continuum_second_moments(params, tau, sigma, init, backend)?;
    Ok((
        OscillatorMoments {
            mean_x: means.mean_x,
            mean_p: means.mean_p,
            mean_x2: second.mean_x2,
            mean_p2: second.mean_p2,
            mean_xp_sym: second.mean_xp_sym,
        },
        means.est_error + second.est_error,
    ))
}

fn check_power_law(params: &PhysicalParams, alpha: f64, init: &OscillatorMoments) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive and finite, got {alpha}")));
    }
    if init.mean_x.abs() > 1e-12 * params.length_unit() {
        return Err(Error::invalid("initial", "the power-law form requires ⟨X(0)⟩ = 0"));
    }
    Ok(())
}

/// Power-law mean position for a truncated-exponential meter preparation,
/// `⟨X(t)⟩ = ⟨P(0)⟩ (α sin ω₀t + t cos ω₀t) / (m(αω₀ + 1)(1 + t²/α²))`.
pub fn power_law_mean_x(params: &PhysicalParams, t: f64, alpha: f64, init: &OscillatorMoments) -> Result<f64> {
    check_power_law(params, alpha, init)?;
    let (s, c) = (params.omega0() * t).sin_cos();
    Ok(init.mean_p * (alpha * s + t * c)
        / (params.mass() * (alpha * params.omega0() + 1.0) * (1.0 + (t / alpha).powi(2))))
}

/// `m d⟨X⟩/dt` of [`power_law_mean_x`], i.e. the mean momentum implied by it.
pub fn power_law_mean_p(params: &PhysicalParams, t: f64, alpha: f64, init: &OscillatorMoments) -> Result<f64> {
    check_power_law(params, alpha, init)?;
    let w0 = params.omega0();
    let (s, c) = (w0 * t).sin_cos();
    let num = alpha * s + t * c;
    let dnum = alpha * w0 * c + c - t * w0 * s;
    let den = (alpha * w0 + 1.0) * (1.0 + (t / alpha).powi(2));
    let dden = (alpha * w0 + 1.0) * 2.0 * t / (alpha * alpha);
    Ok(init.mean_p * (dnum * den - num * dden) / (den * den))
}
