//! Executes a scenario: one moment time series per method, plus diagnostics.

use std::time::Instant;

use rayon::prelude::*;

use crate::continuum::{
    continuum_moments, power_law_mean_p, power_law_mean_x, sigma_from_kappa, FBetaBackend,
};
use crate::discrete::{closed_form_breathing, ensemble_average};
use crate::ensemble::{binomial_ensemble, breakup_mass, gaussian_density, truncated_exponential_ensemble, BecEnsemble};
use crate::error::Result;
use crate::model::{coherent_state_moments, nondimensionalize, OscillatorMoments};
use crate::scenario::{Case, EnsembleSpec, Method, Scenario, ScenarioInitial};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Moments on the scenario's time grid. `moments` are physical; methods that
/// only provide means leave the second moments as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub method: Method,
    pub taus: Vec<f64>,
    pub moments: Vec<OscillatorMoments>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    pub method: Method,
    pub elapsed_seconds: f64,
    /// Largest quadrature error estimate over the grid (reduced units).
    pub max_est_error: Option<f64>,
}

/// Largest deviation between two methods over the grid, in reduced units.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub first: Method,
    pub second: Method,
    pub max_mean_deviation: f64,
    pub max_second_moment_deviation: f64,
    pub mean_threshold: f64,
    pub second_moment_threshold: f64,
}

impl CrossCheck {
    pub fn exceeded(&self) -> bool {
        self.max_mean_deviation > self.mean_threshold || self.max_second_moment_deviation > self.second_moment_threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenario: Scenario,
    pub version: &'static str,
    pub methods: Vec<MethodStats>,
    /// Probability mass of the Gaussian coupling density beyond breakup.
    pub breakup_mass: Option<f64>,
    pub cross_checks: Vec<CrossCheck>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: Vec<TimeSeries>,
    pub manifest: RunManifest,
}

fn initial_moments(s: &Scenario) -> OscillatorMoments {
    let ScenarioInitial::Coherent { mean_x, mean_p } = s.initial;
    coherent_state_moments(&s.params, mean_x * s.params.length_unit(), mean_p * s.params.momentum_unit())
}

fn finite_ensemble(s: &Scenario) -> Result<BecEnsemble> {
    let w0 = s.params.omega0();
    match s.ensemble {
        EnsembleSpec::Binomial { n_atoms, delta_omega } => binomial_ensemble(n_atoms, delta_omega * w0),
        EnsembleSpec::TruncatedExponential { n_atoms, delta_omega, alpha } => {
            truncated_exponential_ensemble(n_atoms, delta_omega * w0, alpha / w0, w0)
        }
        _ => unreachable!("discrete is rejected for density ensembles when the scenario is built"),
    }
}

/// Physical κ of the Gaussian limit.
fn kappa(s: &Scenario) -> Option<f64> {
    s.ensemble.kappa().map(|k| k * s.params.omega0())
}

fn power_law_alpha(s: &Scenario) -> f64 {
    match s.ensemble {
        EnsembleSpec::TruncatedExponential { alpha, .. } | EnsembleSpec::ExponentialDensity { alpha } => {
            alpha / s.params.omega0()
        }
        _ => unreachable!("closed_form in case C needs an exponential ensemble"),
    }
}

fn map_grid<F>(taus: &[f64], f: F) -> Result<Vec<(OscillatorMoments, f64)>>
where
    F: Fn(f64) -> Result<(OscillatorMoments, f64)> + Sync,
{
    taus.par_iter().map(|&tau| f(tau)).collect()
}

fn run_method(s: &Scenario, method: Method, taus: &[f64]) -> Result<(Vec<OscillatorMoments>, Option<f64>)> {
    let params = s.params;
    let init = initial_moments(s);
    let rows = match method {
        Method::Discrete => {
            let ens = finite_ensemble(s)?;
            map_grid(taus, |tau| Ok((ensemble_average(&ens, s.coupling, &params, tau, &init)?, 0.0)))?
        }
        Method::Continuum | Method::Approx => {
            let sigma = sigma_from_kappa(kappa(s).expect("continuum requires a Gaussian limit"), params.omega0());
            let backend = if method == Method::Continuum {
                FBetaBackend::Quadrature(s.quadrature)
            } else {
                FBetaBackend::GaussianApprox
            };
            map_grid(taus, |tau| continuum_moments(&params, tau, sigma, &init, &backend))?
        }
        Method::ClosedForm => match s.case {
            Case::A => {
                let k = kappa(s).expect("case A ensembles have a spread");
                map_grid(taus, |tau| Ok((closed_form_breathing(&params, k, tau, &init), 0.0)))?
            }
            Case::C => {
                let alpha = power_law_alpha(s);
                map_grid(taus, |tau| {
                    let t = tau / params.omega0();
                    let m = OscillatorMoments {
                        mean_x: power_law_mean_x(&params, t, alpha, &init)?,
                        mean_p: power_law_mean_p(&params, t, alpha, &init)?,
                        mean_x2: f64::NAN,
                        mean_p2: f64::NAN,
                        mean_xp_sym: f64::NAN,
                    };
                    Ok((m, 0.0))
                })?
            }
            Case::B => unreachable!("closed_form is rejected for case B when the scenario is built"),
        },
    };
    let max_err = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let est = matches!(method, Method::Continuum).then_some(max_err);
    Ok((rows.into_iter().map(|r| r.0).collect(), est))
}

/// Relative tolerance expected between two methods for this scenario.
fn pair_tolerance(s: &Scenario, a: Method, b: Method) -> f64 {
    let sigma = kappa(s).map(|k| sigma_from_kappa(k, s.params.omega0())).unwrap_or(0.0);
    let sampling = |m: Method| match (m, s.ensemble) {
        // Binomial versus Gaussian weights differ at O(1/N).
        (Method::Discrete, EnsembleSpec::Binomial { n_atoms, .. }) if s.case == Case::B => 4.0 / n_atoms as f64,
        (Method::Approx, _) => 3.0 * sigma,
        _ => 0.0,
    };
    match s.case {
        Case::A => 1e-9,
        Case::B => (sampling(a) + sampling(b)).max(1e-6),
        // The discrete support and the closed form agree on the envelope only.
        Case::C => 0.05,
    }
}

fn max_dev(first: &[OscillatorMoments], second: &[OscillatorMoments], cols: &[usize], s: &Scenario) -> (f64, f64) {
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for (p, q) in first.iter().zip(second) {
        let (p, q) = (nondimensionalize(&s.params, p).as_array(), nondimensionalize(&s.params, q).as_array());
        for &c in cols {
            if p[c].is_finite() && q[c].is_finite() {
                dev = dev.max((p[c] - q[c]).abs());
                scale = scale.max(p[c].abs()).max(q[c].abs());
            }
        }
    }
    (dev, scale.max(1.0))
}

fn cross_checks(s: &Scenario, series: &[TimeSeries]) -> Vec<CrossCheck> {
    let mut out = Vec::new();
    for (i, a) in series.iter().enumerate() {
        for b in &series[i + 1..] {
            let rel = pair_tolerance(s, a.method, b.method);
            let (mean_dev, mean_scale) = max_dev(&a.moments, &b.moments, &[0, 1], s);
            let (second_dev, second_scale) = max_dev(&a.moments, &b.moments, &[2, 3, 4], s);
            out.push(CrossCheck {
                first: a.method,
                second: b.method,
                max_mean_deviation: mean_dev,
                max_second_moment_deviation: second_dev,
                mean_threshold: rel * mean_scale,
                second_moment_threshold: rel * second_scale,
            });
        }
    }
    out
}

/// Runs every method of the scenario on its time grid.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let taus = s.time_grid.taus();
    let mut series = Vec::with_capacity(s.methods.len());
    let mut stats = Vec::with_capacity(s.methods.len());
    for &method in &s.methods {
        let start = Instant::now();
        let (moments, max_est_error) = run_method(s, method, &taus).inspect_err(|e| {
            log::error!("case {} method {method}: {e}", s.case);
        })?;
        let elapsed_seconds = start.elapsed().as_secs_f64();
        log::info!("{method}: {} points in {elapsed_seconds:.3} s", taus.len());
        series.push(TimeSeries { method, taus: taus.clone(), moments });
        stats.push(MethodStats { method, elapsed_seconds, max_est_error });
    }

    let breakup = match (s.case, kappa(s)) {
        (Case::B, Some(k)) => Some(breakup_mass(&gaussian_density(k)?, s.params.omega0())?),
        _ => None,
    };

    let checks = cross_checks(s, &series);
    let mut warnings = Vec::new();
    for c in checks.iter().filter(|c| c.exceeded()) {
        let w = format!(
            "{} vs {}: deviation (means {:.3e}, second moments {:.3e}) exceeds threshold ({:.3e}, {:.3e})",
            c.first,
            c.second,
            c.max_mean_deviation,
            c.max_second_moment_deviation,
            c.mean_threshold,
            c.second_moment_threshold
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    for c in &checks {
        log::info!(
            "{} vs {}: max deviation means {:.3e}, second moments {:.3e}",
            c.first,
            c.second,
            c.max_mean_deviation,
            c.max_second_moment_deviation
        );
    }

    Ok(RunOutput {
        series,
        manifest: RunManifest {
            scenario: s.clone(),
            version: VERSION,
            methods: stats,
            breakup_mass: breakup,
            cross_checks: checks,
            warnings,
        },
    })
}
