//! Branch couplings and weights of the condensate meter.
//!
//! A meter prepared in a mixture of its stationary states splits the
//! oscillator dynamics into branches `H(ε_n) = H + ε_n A` with static weights
//! `P_n`. Finite-N ensembles are lists of `(ε_n, P_n)`; in the irreversible
//! limit they become densities over `ε`.

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, normal_cdf};
use crate::quadrature::{integrate, Tolerance};

/// Largest atom number accepted by the finite-N constructors.
pub const DEFAULT_MAX_ATOMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEntry {
    /// `ε_n = δΩ (N − 2n)`
    pub epsilon: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BecEnsemble {
    entries: Vec<EnsembleEntry>,
    n_atoms: usize,
    delta_omega: f64,
}

impl BecEnsemble {
    /// Wraps arbitrary entries, renormalizing the weights.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn from_entries(entries: Vec<EnsembleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("entries", "ensemble must have at least one entry"));
        }
        if entries.iter().any(|e| !e.epsilon.is_finite() || !(e.weight >= 0.0) || !e.weight.is_finite()) {
            return Err(Error::invalid("entries", "weights must be finite and non-negative, epsilons finite"));
        }
        let total = compensated_sum(entries.iter().map(|e| e.weight));
        if total <= 0.0 {
            return Err(Error::invalid("entries", "weights sum to zero"));
        }
        let entries = entries
            .into_iter()
            .map(|e| EnsembleEntry { weight: e.weight / total, ..e })
            .collect::<Vec<_>>();
        let n_atoms = entries.len() - 1;
        Ok(Self { entries, n_atoms, delta_omega: 0.0 })
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Zero for ensembles built with [`BecEnsemble::from_entries`].
    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.entries.iter().map(|e| e.weight))
    }

    /// `Σ P_n ε_n`
    pub fn mean_epsilon(&self) -> f64 {
        compensated_sum(self.entries.iter().map(|e| e.weight * e.epsilon))
    }

    /// `Σ P_n ε_n²`, the effective κ² of the ensemble.
    pub fn second_moment_epsilon(&self) -> f64 {
        compensated_sum(self.entries.iter().map(|e| e.weight * e.epsilon * e.epsilon))
    }
}

fn check_finite_ensemble(n_atoms: usize, delta_omega: f64, max_atoms: usize) -> Result<()> {
    if n_atoms < 1 {
        return Err(Error::invalid("n_atoms", "must be at least 1"));
    }
    if n_atoms > max_atoms {
        return Err(Error::invalid("n_atoms", format!("{n_atoms} exceeds the configured maximum {max_atoms}")));
    }
    if !(delta_omega.is_finite() && delta_omega > 0.0) {
        return Err(Error::invalid("delta_omega", format!("must be positive and finite, got {delta_omega}")));
    }
    Ok(())
}

fn epsilon_of(n_atoms: usize, delta_omega: f64, n: usize) -> f64 {
    delta_omega * (n_atoms as f64 - 2.0 * n as f64)
}

/// Binomial weights `P_n = N!/(2^N (N−n)! n!)` of a condensate localized in
/// one well.
pub fn binomial_ensemble(n_atoms: usize, delta_omega: f64) -> Result<BecEnsemble> {
    binomial_ensemble_with_limit(n_atoms, delta_omega, DEFAULT_MAX_ATOMS)
}

pub fn binomial_ensemble_with_limit(n_atoms: usize, delta_omega: f64, max_atoms: usize) -> Result<BecEnsemble> {
    check_finite_ensemble(n_atoms, delta_omega, max_atoms)?;
    // Ratio recurrence P_{n+1}/P_n = (N−n)/(n+1) from the central term
    // outwards, mirrored so that P_n = P_{N−n} holds bit-for-bit.
    let n = n_atoms;
    let half = n / 2;
    let mut unnormalized = vec![0.0; n + 1];
    unnormalized[half] = 1.0;
    for k in half..n {
        unnormalized[k + 1] = unnormalized[k] * (n - k) as f64 / (k + 1) as f64;
    }
    for k in 0..half {
        unnormalized[k] = unnormalized[n - k];
    }
    let total = compensated_sum(unnormalized.iter().copied());
    let entries = unnormalized
        .iter()
        .enumerate()
        .map(|(k, &u)| EnsembleEntry { epsilon: epsilon_of(n, delta_omega, k), weight: u / total })
        .collect();
    Ok(BecEnsemble { entries, n_atoms, delta_omega })
}

/// Weights `∝ exp(−α ω_n)` on the branches `n ≥ N/2` (`ε_n ≤ 0`), zero
/// elsewhere, with `ω_n = sqrt(ω₀² + 4 ε_n ω₀)`.
pub fn truncated_exponential_ensemble(
    n_atoms: usize,
    delta_omega: f64,
    alpha: f64,
    omega0: f64,
) -> Result<BecEnsemble> {
    check_finite_ensemble(n_atoms, delta_omega, DEFAULT_MAX_ATOMS)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive and finite, got {alpha}")));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::invalid("omega0", format!("must be positive and finite, got {omega0}")));
    }
    let n = n_atoms;
    let first = n.div_ceil(2);
    let deepest = epsilon_of(n, delta_omega, n);
    if omega0 * omega0 + 4.0 * deepest * omega0 <= 0.0 {
        return Err(Error::BreakupRegime { index: Some(n), epsilon: deepest });
    }
    let frequency = |k: usize| (omega0 * omega0 + 4.0 * epsilon_of(n, delta_omega, k) * omega0).sqrt();
    // Smallest retained frequency carries the largest weight; shift by it.
    let omega_min = frequency(n);
    let unnormalized: Vec<f64> = (0..=n)
        .map(|k| if k >= first { (-alpha * (frequency(k) - omega_min)).exp() } else { 0.0 })
        .collect();
    let total = compensated_sum(unnormalized.iter().copied());
    let entries = unnormalized
        .iter()
        .enumerate()
        .map(|(k, &u)| EnsembleEntry { epsilon: epsilon_of(n, delta_omega, k), weight: u / total })
        .collect();
    Ok(BecEnsemble { entries, n_atoms, delta_omega })
}

/// Normalized density over `ε` in the irreversible limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuumDensity {
    /// `P(ε) = (2πκ²)^(-1/2) exp(−ε²/2κ²)`
    Gaussian { kappa: f64 },
    /// `P(ε) ∝ exp(−α ω(ε))` on `−ω₀/4 ≤ ε ≤ 0`, i.e. `0 ≤ ω ≤ ω₀`.
    TruncatedExponential { alpha: f64, omega0: f64 },
}

pub fn gaussian_density(kappa: f64) -> Result<ContinuumDensity> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid("kappa", format!("must be positive and finite, got {kappa}")));
    }
    Ok(ContinuumDensity::Gaussian { kappa })
}

pub fn truncated_exponential_density(alpha: f64, omega0: f64) -> Result<ContinuumDensity> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive and finite, got {alpha}")));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::invalid("omega0", format!("must be positive and finite, got {omega0}")));
    }
    Ok(ContinuumDensity::TruncatedExponential { alpha, omega0 })
}

/// `1 − e^{−y}(1 + y)` without cancellation for small `y`.
fn one_minus_exp_poly(y: f64) -> f64 {
    if y < 0.1 {
        // Σ_{k≥2} (−1)^k (k−1) y^k / k!
        let mut term = 1.0;
        let mut total = 0.0;
        for k in 1..=24u32 {
            term *= -y / k as f64;
            if k >= 2 {
                total += (k - 1) as f64 * term;
            }
        }
        total
    } else {
        -(-y).exp_m1() - y * (-y).exp()
    }
}

impl ContinuumDensity {
    pub fn pdf(&self, epsilon: f64) -> f64 {
        match *self {
            ContinuumDensity::Gaussian { kappa } => {
                (-0.5 * (epsilon / kappa).powi(2)).exp() / (kappa * (2.0 * std::f64::consts::PI).sqrt())
            }
            ContinuumDensity::TruncatedExponential { alpha, omega0 } => {
                if !(-0.25 * omega0..=0.0).contains(&epsilon) {
                    return 0.0;
                }
                let omega = (omega0 * omega0 + 4.0 * epsilon * omega0).max(0.0).sqrt();
                // ∫ e^{−αω} dε with dε = ω dω / (2ω₀)
                let norm = one_minus_exp_poly(alpha * omega0) / (2.0 * omega0 * alpha * alpha);
                (-alpha * omega).exp() / norm
            }
        }
    }

    /// Density of the branch frequency `ω` for the truncated-exponential kind:
    /// `ω e^{−αω} / Z` on `[0, ω₀]`.
    pub fn frequency_pdf(&self, omega: f64) -> Option<f64> {
        match *self {
            ContinuumDensity::Gaussian { .. } => None,
            ContinuumDensity::TruncatedExponential { alpha, omega0 } => {
                if !(0.0..=omega0).contains(&omega) {
                    return Some(0.0);
                }
                let norm = one_minus_exp_poly(alpha * omega0) / (alpha * alpha);
                Some(omega * (-alpha * omega).exp() / norm)
            }
        }
    }

    /// Interval outside which the density is zero (or below 1e−300 for the
    /// Gaussian).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ContinuumDensity::Gaussian { kappa } => (-40.0 * kappa, 40.0 * kappa),
            ContinuumDensity::TruncatedExponential { omega0, .. } => (-0.25 * omega0, 0.0),
        }
    }

    /// `∫ P(ε) dε` by adaptive quadrature at absolute tolerance 1e−12.
    pub fn total_mass(&self) -> Result<f64> {
        let (a, b) = self.support();
        let tol = Tolerance { abs: 1e-12, rel: 0.0 };
        let result = integrate(|e| [self.pdf(e)], a, b, 16, tol, 10_000)?;
        Ok(result.value[0])
    }
}

/// Probability mass of the branches with imaginary frequency,
/// `∫_{−∞}^{−ω₀/4} P(ε) dε = Φ(−ω₀/(4κ))`.
pub fn breakup_mass(density: &ContinuumDensity, omega0: f64) -> Result<f64> {
    match *density {
        ContinuumDensity::Gaussian { kappa } => {
            if !(omega0.is_finite() && omega0 > 0.0) {
                return Err(Error::invalid("omega0", format!("must be positive and finite, got {omega0}")));
            }
            Ok(normal_cdf(-omega0 / (4.0 * kappa)))
        }
        ContinuumDensity::TruncatedExponential { .. } => Err(Error::invalid(
            "density",
            "breakup mass is defined for the Gaussian density only",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};

    fn exact_binomial_weight(n: u64, k: u64) -> f64 {
        let mut c = BigUint::one();
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        let scale = BigUint::one() << n;
        // Exact integers up to 2^200 fit in f64 after one rounding each.
        c.to_f64().unwrap() / scale.to_f64().unwrap()
    }

    #[test]
    fn two_atoms() {
        let ens = binomial_ensemble(2, 1.0).unwrap();
        let w: Vec<_> = ens.entries().iter().map(|e| e.weight).collect();
        let eps: Vec<_> = ens.entries().iter().map(|e| e.epsilon).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
        assert_eq!(eps, vec![2.0, 0.0, -2.0]);
    }

    #[test]
    fn one_atom() {
        let ens = binomial_ensemble(1, 0.5).unwrap();
        assert_eq!(ens.entries(), &[
            EnsembleEntry { epsilon: 0.5, weight: 0.5 },
            EnsembleEntry { epsilon: -0.5, weight: 0.5 },
        ]);
    }

    #[test]
    fn central_weight_matches_exact_integer_arithmetic() {
        let ens = binomial_ensemble(100, 0.01).unwrap();
        let exact = exact_binomial_weight(100, 50);
        let got = ens.entries()[50].weight;
        assert!(((got - exact) / exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn all_weights_match_exact_up_to_200() {
        for n in [3u64, 17, 64, 170, 171, 200] {
            let ens = binomial_ensemble(n as usize, 1.0).unwrap();
            for (k, e) in ens.entries().iter().enumerate() {
                let exact = exact_binomial_weight(n, k as u64);
                assert!(((e.weight - exact) / exact).abs() < 1e-12, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn binomial_is_symmetric_and_normalized() {
        for n in [1, 2, 7, 100, 1001, 100_000] {
            let ens = binomial_ensemble(n, 0.3).unwrap();
            assert_eq!(ens.len(), n + 1);
            assert!((ens.weight_sum() - 1.0).abs() < 1e-12);
            let e = ens.entries();
            for k in 0..=n {
                assert_eq!(e[k].weight, e[n - k].weight);
                assert_eq!(e[k].epsilon, -e[n - k].epsilon);
            }
            let kappa2 = 0.09 * n as f64;
            assert!(ens.mean_epsilon().abs() <= 1e-15 * kappa2.sqrt());
            assert!((ens.second_moment_epsilon() - kappa2).abs() < 1e-12 * kappa2);
        }
    }

    #[test]
    fn epsilons_form_arithmetic_sequence() {
        let ens = binomial_ensemble(10, 0.25).unwrap();
        for (k, e) in ens.entries().iter().enumerate() {
            assert_eq!(e.epsilon, 0.25 * (10.0 - 2.0 * k as f64));
        }
    }

    #[test]
    fn atom_limit_is_enforced() {
        assert!(matches!(
            binomial_ensemble(DEFAULT_MAX_ATOMS + 1, 1e-4),
            Err(Error::InvalidParameter { name: "n_atoms", .. })
        ));
        assert!(binomial_ensemble_with_limit(50, 0.1, 10).is_err());
        assert!(binomial_ensemble(0, 0.1).is_err());
        assert!(binomial_ensemble(4, 0.0).is_err());
    }

    #[test]
    fn gaussian_density_basics() {
        let d = gaussian_density(1.0).unwrap();
        assert!((d.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(d.pdf(0.7), d.pdf(-0.7));
        for kappa in [0.024, 1.0, 7.5] {
            let d = gaussian_density(kappa).unwrap();
            assert!((d.total_mass().unwrap() - 1.0).abs() < 1e-10);
            let (a, b) = d.support();
            let tol = Tolerance { abs: 1e-12, rel: 0.0 };
            let m = integrate(|e| [e * d.pdf(e), e * e * d.pdf(e)], a, b, 16, tol, 10_000).unwrap();
            assert!(m.value[0].abs() < 1e-12 * kappa);
            assert!((m.value[1].sqrt() - kappa).abs() < 1e-10 * kappa);
        }
        assert!(gaussian_density(0.0).is_err());
    }

    /// Sup-norm gap between binomial weights and the Gaussian density at
    /// fixed κ, relative to the peak.
    fn stirling_gap(n: usize, kappa: f64) -> f64 {
        let d_omega = kappa / (n as f64).sqrt();
        let ens = binomial_ensemble(n, d_omega).unwrap();
        let density = gaussian_density(kappa).unwrap();
        let peak = density.pdf(0.0) * 2.0 * d_omega;
        ens.entries()
            .iter()
            .map(|e| (e.weight - density.pdf(e.epsilon) * 2.0 * d_omega).abs())
            .fold(0.0, f64::max)
            / peak
    }

    #[test]
    fn binomial_converges_to_gaussian_at_rate_one_over_n() {
        let gaps: Vec<f64> = [100, 1_000, 10_000].iter().map(|&n| stirling_gap(n, 0.7)).collect();
        for pair in gaps.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((7.0..14.0).contains(&ratio), "gaps {gaps:?}");
        }
        assert!(gaps[2] < 1e-4, "gaps {gaps:?}");
    }

    #[test]
    fn truncated_exponential_small_alpha_is_uniform_on_upper_half() {
        let ens = truncated_exponential_ensemble(2, 0.01, 1e-12, 1.0).unwrap();
        let w: Vec<_> = ens.entries().iter().map(|e| e.weight).collect();
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 0.5).abs() < 1e-12 && (w[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncated_exponential_direct_evaluation() {
        let ens = truncated_exponential_ensemble(2, 0.01, 1.0, 1.0).unwrap();
        let omega2 = (1.0f64 - 0.08).sqrt();
        let (a, b) = ((-1.0f64).exp(), (-omega2).exp());
        let w: Vec<_> = ens.entries().iter().map(|e| e.weight).collect();
        assert_eq!(w[0], 0.0);
        assert!((w[1] - a / (a + b)).abs() < 1e-15);
        assert!((w[2] - b / (a + b)).abs() < 1e-15);
    }

    #[test]
    fn truncated_exponential_support_size() {
        for n in [1usize, 2, 3, 10, 11, 1000] {
            let ens = truncated_exponential_ensemble(n, 1e-5, 2.0, 1.0).unwrap();
            let nonzero = ens.entries().iter().filter(|e| e.weight > 0.0).count();
            assert_eq!(nonzero, (n + 1).div_ceil(2), "N={n}");
            assert!((ens.weight_sum() - 1.0).abs() < 1e-12);
            assert!(ens.entries().iter().all(|e| e.weight == 0.0 || e.epsilon <= 0.0));
        }
    }

    #[test]
    fn truncated_exponential_rejects_breakup() {
        let err = truncated_exponential_ensemble(100, 0.003, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::BreakupRegime { index: Some(100), .. }), "{err}");
    }

    #[test]
    fn truncated_exponential_density_normalized() {
        for (alpha, omega0) in [(5.0, 1.0), (1e-4, 1.0), (0.3, 2.5)] {
            let d = truncated_exponential_density(alpha, omega0).unwrap();
            assert!((d.total_mass().unwrap() - 1.0).abs() < 1e-10, "alpha={alpha}");
            let tol = Tolerance { abs: 1e-12, rel: 0.0 };
            let m = integrate(|w| [d.frequency_pdf(w).unwrap()], 0.0, omega0, 16, tol, 10_000).unwrap();
            assert!((m.value[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn breakup_mass_values() {
        let d = gaussian_density(0.25).unwrap();
        assert!((breakup_mass(&d, 1.0).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-15);
        let tiny = breakup_mass(&gaussian_density(1e-3).unwrap(), 1.0).unwrap();
        assert_eq!(tiny, 0.0);
        assert!(breakup_mass(&truncated_exponential_density(1.0, 1.0).unwrap(), 1.0).is_err());
    }

    /// Upper normal tail from the Laplace continued fraction
    /// Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...)))).
    fn normal_tail_oracle(x: f64) -> f64 {
        let mut cf = x;
        for k in (1..200).rev() {
            cf = x + k as f64 / cf;
        }
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi / cf
    }

    #[test]
    fn breakup_mass_at_weak_coupling() {
        let kappa = 0.024;
        let mass = breakup_mass(&gaussian_density(kappa).unwrap(), 1.0).unwrap();
        let oracle = normal_tail_oracle(1.0 / (4.0 * kappa));
        assert!(mass < 1e-24);
        assert!(((mass - oracle) / oracle).abs() < 1e-12, "{mass} vs {oracle}");
    }
}
