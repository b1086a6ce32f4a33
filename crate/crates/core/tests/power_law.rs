use bec_oscillator::continuum::power_law_mean_x;
use bec_oscillator::discrete::ensemble_average;
use bec_oscillator::ensemble::{truncated_exponential_ensemble, BecEnsemble, EnsembleEntry};
use bec_oscillator::model::{coherent_state_moments, nondimensionalize};
use bec_oscillator::{CouplingKind, PhysicalParams};

const ALPHA: f64 = 5.0;

/// Least-squares slope of `ln y` against `ln t`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(t, y)| (t.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Local maxima of `|f|` on a fine grid over `[t0, t1]`.
fn peaks(f: impl Fn(f64) -> f64, t0: f64, t1: f64, step: f64) -> Vec<(f64, f64)> {
    let samples: Vec<(f64, f64)> = (0..=((t1 - t0) / step) as usize)
        .map(|k| {
            let t = t0 + k as f64 * step;
            (t, f(t).abs())
        })
        .collect();
    samples.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1).map(|w| w[1]).collect()
}

/// Exponential weights on the couplings `ε ≥ 0` (frequencies above `ω₀`).
fn mirrored_ensemble(n_atoms: usize, delta_omega: f64, alpha: f64) -> BecEnsemble {
    let entries = (0..=n_atoms / 2)
        .map(|k| {
            let epsilon = 2.0 * delta_omega * k as f64;
            let omega = (1.0 + 4.0 * epsilon).sqrt();
            EnsembleEntry { epsilon, weight: (-alpha * (omega - 1.0)).exp() }
        })
        .collect();
    BecEnsemble::from_entries(entries).unwrap()
}

#[test]
fn closed_form_starts_at_zero() {
    let params = PhysicalParams::unit();
    let init = coherent_state_moments(&params, 0.0, 2.0 * params.momentum_unit());
    assert_eq!(power_law_mean_x(&params, 0.0, ALPHA, &init).unwrap(), 0.0);
}

#[test]
fn closed_form_decays_as_inverse_time() {
    let params = PhysicalParams::unit();
    let init = coherent_state_moments(&params, 0.0, 2.0 * params.momentum_unit());
    let p = peaks(|t| power_law_mean_x(&params, t, ALPHA, &init).unwrap(), 10.0 * ALPHA, 100.0 * ALPHA, 0.01);
    assert!(p.len() > 100);
    let slope = log_log_slope(&p);
    assert!((slope + 1.0).abs() <= 0.05, "{slope}");
}

#[test]
fn closed_form_matches_exponential_weights_above_the_bare_frequency() {
    let params = PhysicalParams::unit();
    let init = coherent_state_moments(&params, 0.0, 2.0 * params.momentum_unit());
    let ens = mirrored_ensemble(10_000, 9e-4, ALPHA);
    let mut worst = 0.0f64;
    for k in 0..=200 {
        let tau = 0.5 * k as f64;
        let d = nondimensionalize(&params, &ensemble_average(&ens, CouplingKind::PositionSquared, &params, tau, &init).unwrap());
        let c = power_law_mean_x(&params, tau, ALPHA, &init).unwrap() / params.length_unit();
        worst = worst.max((d.mean_x - c).abs());
    }
    // Amplitude is 2; the residual is the discretization of the weights.
    assert!(worst < 0.04, "{worst}");
}

#[test]
fn weights_below_the_bare_frequency_give_the_same_decay_law() {
    let n = 10_000;
    let ens = truncated_exponential_ensemble(n, 2e-5, ALPHA, 1.0).unwrap();
    // Modulus of the analytic signal of ⟨x(τ)⟩ = p₀ Σ P_n sin(ω_n τ)/ω_n.
    let envelope = |tau: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for e in ens.entries().iter().filter(|e| e.weight > 0.0) {
            let w = (1.0 + 4.0 * e.epsilon).sqrt();
            re += e.weight * (w * tau).cos() / w;
            im += e.weight * (w * tau).sin() / w;
        }
        2.0 * (re * re + im * im).sqrt()
    };
    let closed = |tau: f64| 2.0 * (ALPHA * ALPHA + tau * tau).sqrt() / ((ALPHA + 1.0) * (1.0 + (tau / ALPHA).powi(2)));
    let grid: Vec<f64> = (0..=90).map(|k| 2.0 * ALPHA + k as f64 * 0.2 * ALPHA).collect();
    let lit: Vec<(f64, f64)> = grid.iter().map(|&t| (t, envelope(t))).collect();
    let cf: Vec<(f64, f64)> = grid.iter().map(|&t| (t, closed(t))).collect();
    let (s_lit, s_cf) = (log_log_slope(&lit), log_log_slope(&cf));
    assert!((s_lit / s_cf - 1.0).abs() < 0.1, "literal {s_lit} closed {s_cf}");
}
