//! Oscillator parameters, the five tracked moments, and unit conversions.
//!
//! Physical quantities use ħ = 1. The reduced units used by the dynamics
//! measure position in `X₀ = (2mω₀)^(-1/2)`, momentum in `P₀ = (mω₀/2)^(1/2)`
//! and time as `τ = ω₀t`. In those units free motion is a plain rotation of
//! `(x, p)` and a coherent state has unit variances.

use crate::error::{Error, Result};

/// Relative slack allowed when checking the uncertainty relation.
pub const UNCERTAINTY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    omega0: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, omega0: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("mass", format!("must be positive and finite, got {mass}")));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::invalid("omega0", format!("must be positive and finite, got {omega0}")));
        }
        Ok(Self { mass, omega0 })
    }

    /// `m = ω₀ = 1`.
    pub fn unit() -> Self {
        Self { mass: 1.0, omega0: 1.0 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Length unit `X₀ = (2mω₀)^(-1/2)`.
    pub fn length_unit(&self) -> f64 {
        (2.0 * self.mass * self.omega0).sqrt().recip()
    }

    /// Momentum unit `P₀ = (mω₀/2)^(1/2)`.
    pub fn momentum_unit(&self) -> f64 {
        (0.5 * self.mass * self.omega0).sqrt()
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::unit()
    }
}

/// First and second moments of position and momentum at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OscillatorMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub mean_x2: f64,
    pub mean_p2: f64,
    /// `⟨XP + PX⟩`
    pub mean_xp_sym: f64,
}

impl OscillatorMoments {
    pub fn var_x(&self) -> f64 {
        self.mean_x2 - self.mean_x * self.mean_x
    }

    pub fn var_p(&self) -> f64 {
        self.mean_p2 - self.mean_p * self.mean_p
    }

    /// Symmetrized covariance `⟨XP + PX⟩/2 − ⟨X⟩⟨P⟩`.
    pub fn cov_xp(&self) -> f64 {
        0.5 * self.mean_xp_sym - self.mean_x * self.mean_p
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.var_x() * self.var_p()
    }

    pub(crate) fn as_array(&self) -> [f64; 5] {
        [self.mean_x, self.mean_p, self.mean_x2, self.mean_p2, self.mean_xp_sym]
    }

    pub(crate) fn from_array(v: [f64; 5]) -> Self {
        Self { mean_x: v[0], mean_p: v[1], mean_x2: v[2], mean_p2: v[3], mean_xp_sym: v[4] }
    }

    /// Checks that physical (ħ = 1) moments describe a quantum state:
    /// non-negative variances and `var_x·var_p − cov² ≥ 1/4`.
    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("moments", "all moments must be finite"));
        }
        let (vx, vp) = (self.var_x(), self.var_p());
        if vx < 0.0 || vp < 0.0 {
            return Err(Error::invalid(
                "moments",
                format!("negative variance (var_x = {vx}, var_p = {vp})"),
            ));
        }
        let det = vx * vp - self.cov_xp().powi(2);
        if det < 0.25 * (1.0 - UNCERTAINTY_RTOL) {
            return Err(Error::invalid(
                "moments",
                format!("violates the uncertainty relation: var_x·var_p − cov² = {det} < 1/4"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// `A = X/X₀`: the meter tracks position.
    Position,
    /// `A = X²/X₀²`: the meter tracks the squared position.
    PositionSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Coherent { mean_x0: f64, mean_p0: f64 },
    RawMoments(OscillatorMoments),
}

impl InitialState {
    /// Physical moments of the state, rejecting raw moments that violate the
    /// uncertainty relation.
    pub fn moments(&self, params: &PhysicalParams) -> Result<OscillatorMoments> {
        match *self {
            InitialState::Coherent { mean_x0, mean_p0 } => {
                if !(mean_x0.is_finite() && mean_p0.is_finite()) {
                    return Err(Error::invalid("initial", "coherent-state means must be finite"));
                }
                Ok(coherent_state_moments(params, mean_x0, mean_p0))
            }
            InitialState::RawMoments(m) => {
                m.validate()?;
                Ok(m)
            }
        }
    }
}

/// Minimum-uncertainty Gaussian with the given means.
pub fn coherent_state_moments(params: &PhysicalParams, mean_x0: f64, mean_p0: f64) -> OscillatorMoments {
    let x_unit = params.length_unit();
    let p_unit = params.momentum_unit();
    OscillatorMoments {
        mean_x: mean_x0,
        mean_p: mean_p0,
        mean_x2: x_unit * x_unit + mean_x0 * mean_x0,
        mean_p2: p_unit * p_unit + mean_p0 * mean_p0,
        mean_xp_sym: 2.0 * mean_x0 * mean_p0,
    }
}

/// Expresses physical moments in units of `X₀`, `P₀`, `X₀²`, `P₀²` and `X₀P₀`.
pub fn nondimensionalize(params: &PhysicalParams, m: &OscillatorMoments) -> OscillatorMoments {
    let x = params.length_unit();
    let p = params.momentum_unit();
    OscillatorMoments {
        mean_x: m.mean_x / x,
        mean_p: m.mean_p / p,
        mean_x2: m.mean_x2 / (x * x),
        mean_p2: m.mean_p2 / (p * p),
        mean_xp_sym: m.mean_xp_sym / (x * p),
    }
}

/// Inverse of [`nondimensionalize`].
pub fn redimensionalize(params: &PhysicalParams, m: &OscillatorMoments) -> OscillatorMoments {
    let x = params.length_unit();
    let p = params.momentum_unit();
    OscillatorMoments {
        mean_x: m.mean_x * x,
        mean_p: m.mean_p * p,
        mean_x2: m.mean_x2 * (x * x),
        mean_p2: m.mean_p2 * (p * p),
        mean_xp_sym: m.mean_xp_sym * (x * p),
    }
}
