//! Exact per-branch evolution of the five moments and the weighted average
//! over a finite ensemble.
//!
//! Every branch Hamiltonian is quadratic, so in reduced units each branch acts
//! on `(x, p)` as an affine symplectic map and the moments transform in
//! closed form. No time stepping happens here.

use rayon::prelude::*;

use crate::ensemble::BecEnsemble;
use crate::error::{Error, Result};
use crate::model::{nondimensionalize, redimensionalize, CouplingKind, OscillatorMoments, PhysicalParams};
use crate::numeric::CompensatedSum;

/// Branches with `ω(ε)/ω₀` below this are rejected even though `ω` is real.
pub const MIN_FREQUENCY_RATIO: f64 = 1e-6;

/// Ensembles larger than this are evaluated in parallel.
const PARALLEL_THRESHOLD: usize = 4096;

/// `x' = xx·x + xp·p + x0`, `p' = px·x + pp·p + p0` in reduced units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceMap {
    pub xx: f64,
    pub xp: f64,
    pub x0: f64,
    pub px: f64,
    pub pp: f64,
    pub p0: f64,
}

impl PhaseSpaceMap {
    pub fn identity() -> Self {
        Self { xx: 1.0, xp: 0.0, x0: 0.0, px: 0.0, pp: 1.0, p0: 0.0 }
    }

    /// Free oscillator rotated by `tau`.
    pub fn free(tau: f64) -> Self {
        let (s, c) = tau.sin_cos();
        Self { xx: c, xp: s, x0: 0.0, px: -s, pp: c, p0: 0.0 }
    }

    /// Rotation about the shifted centre `x = −2e` (the potential minimum for
    /// linear coupling `e·x` in reduced units).
    pub fn shifted(e: f64, tau: f64) -> Self {
        let (s, c) = tau.sin_cos();
        let shift = 2.0 * e;
        Self { xx: c, xp: s, x0: shift * (c - 1.0), px: -s, pp: c, p0: -shift * s }
    }

    /// Harmonic motion at frequency ratio `w = ω/ω₀`.
    pub fn scaled_frequency(w: f64, tau: f64) -> Self {
        let (s, c) = (w * tau).sin_cos();
        Self { xx: c, xp: s / w, x0: 0.0, px: -w * s, pp: c, p0: 0.0 }
    }

    pub fn determinant(&self) -> f64 {
        self.xx * self.pp - self.xp * self.px
    }

    /// Pushes reduced moments through the map.
    pub fn apply(&self, m: &OscillatorMoments) -> OscillatorMoments {
        let Self { xx: a, xp: b, x0: c, px: d, pp: e, p0: f } = *self;
        let (x, p, x2, p2, sym) = (m.mean_x, m.mean_p, m.mean_x2, m.mean_p2, m.mean_xp_sym);
        OscillatorMoments {
            mean_x: a * x + b * p + c,
            mean_p: d * x + e * p + f,
            mean_x2: a * a * x2 + b * b * p2 + a * b * sym + 2.0 * c * (a * x + b * p) + c * c,
            mean_p2: d * d * x2 + e * e * p2 + d * e * sym + 2.0 * f * (d * x + e * p) + f * f,
            mean_xp_sym: 2.0 * a * d * x2
                + 2.0 * b * e * p2
                + (a * e + b * d) * sym
                + 2.0 * (a * f + c * d) * x
                + 2.0 * (b * f + c * e) * p
                + 2.0 * c * f,
        }
    }
}

/// `ω(ε)/ω₀ = sqrt(1 + 4ε/ω₀)` for quadratic coupling, with the breakup guard.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn frequency_ratio(e: f64) -> Result<f64> {
    let w2 = 1.0 + 4.0 * e;
    if !(w2 > 0.0) || w2.sqrt() < MIN_FREQUENCY_RATIO {
        return Err(Error::BreakupRegime { index: None, epsilon: e });
    }
    Ok(w2.sqrt())
}

/// Branch map for coupling strength `e = ε/ω₀` after reduced time `tau`.
pub fn branch_map(coupling: CouplingKind, e: f64, tau: f64) -> Result<PhaseSpaceMap> {
    match coupling {
        CouplingKind::Position => Ok(PhaseSpaceMap::shifted(e, tau)),
        CouplingKind::PositionSquared => Ok(PhaseSpaceMap::scaled_frequency(frequency_ratio(e)?, tau)),
    }
}

fn evolve_with(params: &PhysicalParams, map: &PhaseSpaceMap, init: &OscillatorMoments) -> OscillatorMoments {
    redimensionalize(params, &map.apply(&nondimensionalize(params, init)))
}

/// Evolution of an uncoupled oscillator.
pub fn free_evolution(params: &PhysicalParams, tau: f64, init: &OscillatorMoments) -> OscillatorMoments {
    evolve_with(params, &PhaseSpaceMap::free(tau), init)
}

/// Branch with linear coupling `εX/X₀`: motion in a potential displaced by
/// `δx = sqrt(2/(mω₀))·ε/ω₀`.
pub fn evolve_branch_shifted(
    params: &PhysicalParams,
    epsilon: f64,
    tau: f64,
    init: &OscillatorMoments,
) -> OscillatorMoments {
    evolve_with(params, &PhaseSpaceMap::shifted(epsilon / params.omega0(), tau), init)
}

/// Branch with quadratic coupling `εX²/X₀²`: motion at `ω = sqrt(ω₀² + 4εω₀)`.
pub fn evolve_branch_frequency(
    params: &PhysicalParams,
    epsilon: f64,
    tau: f64,
    init: &OscillatorMoments,
) -> Result<OscillatorMoments> {
    let w = frequency_ratio(epsilon / params.omega0()).map_err(|_| Error::BreakupRegime { index: None, epsilon })?;
    Ok(evolve_with(params, &PhaseSpaceMap::scaled_frequency(w, tau), init))
}

/// Reduced-unit average over the ensemble of branch-evolved moments.
pub(crate) fn ensemble_average_reduced(
    ens: &BecEnsemble,
    coupling: CouplingKind,
    omega0: f64,
    tau: f64,
    init: &OscillatorMoments,
) -> Result<OscillatorMoments> {
    let branch = |(n, entry): (usize, &crate::ensemble::EnsembleEntry)| -> Result<Option<[f64; 5]>> {
        if entry.weight == 0.0 {
            return Ok(None);
        }
        let map = branch_map(coupling, entry.epsilon / omega0, tau)
            .map_err(|_| Error::BreakupRegime { index: Some(n), epsilon: entry.epsilon })?;
        Ok(Some(map.apply(init).as_array().map(|v| entry.weight * v)))
    };
    // Per-branch terms are computed independently and reduced in index order,
    // so the parallel and sequential paths give identical bits.
    let terms: Vec<Option<[f64; 5]>> = if ens.len() > PARALLEL_THRESHOLD {
        ens.entries().par_iter().enumerate().map(branch).collect::<Result<_>>()?
    } else {
        ens.entries().iter().enumerate().map(branch).collect::<Result<_>>()?
    };
    let mut acc = [CompensatedSum::default(); 5];
    for term in terms.into_iter().flatten() {
        for (a, v) in acc.iter_mut().zip(term) {
            a.add(v);
        }
    }
    Ok(OscillatorMoments::from_array(acc.map(|a| a.value())))
}

/// `Σ_n P_n ⟨O⟩_n(τ)` for the five moments. Variances of the result are those
/// of the mixture.
pub fn ensemble_average(
    ens: &BecEnsemble,
    coupling: CouplingKind,
    params: &PhysicalParams,
    tau: f64,
    init: &OscillatorMoments,
) -> Result<OscillatorMoments> {
    let reduced = nondimensionalize(params, init);
    let avg = ensemble_average_reduced(ens, coupling, params.omega0(), tau, &reduced)?;
    Ok(redimensionalize(params, &avg))
}

/// Mixture moments for linear coupling with any symmetric ensemble of
/// spread `κ² = Σ P_n ε_n²`: free means, with
/// `ΔX² = ΔX²_free + 4σ_X² sin⁴(τ/2)` and `ΔP² = ΔP²_free + σ_P² sin²τ`,
/// `σ_X = sqrt(2/(mω₀))·κ/ω₀`, `σ_P = sqrt(2mω₀)·κ/ω₀`.
pub fn closed_form_breathing(
    params: &PhysicalParams,
    kappa: f64,
    tau: f64,
    init: &OscillatorMoments,
) -> OscillatorMoments {
    let free = nondimensionalize(params, &free_evolution(params, tau, init));
    // σ_X/X₀ = σ_P/P₀ = 2κ/ω₀
    let spread = 2.0 * kappa / params.omega0();
    let spread2 = spread * spread;
    let (s, _) = tau.sin_cos();
    let s_half = (0.5 * tau).sin();
    let reduced = OscillatorMoments {
        mean_x2: free.mean_x2 + 4.0 * spread2 * s_half.powi(4),
        mean_p2: free.mean_p2 + spread2 * s * s,
        mean_xp_sym: free.mean_xp_sym + 4.0 * spread2 * s * s_half * s_half,
        ..free
    };
    redimensionalize(params, &reduced)
}
