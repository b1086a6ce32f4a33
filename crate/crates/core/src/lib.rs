//! Moment dynamics of a harmonic oscillator continuously monitored by a
//! Bose–Einstein condensate meter.
//!
//! Each condensate occupation number selects a branch with its own coupling
//! `ε_n`. Branches evolve under an affine symplectic map, and observables are
//! probability-weighted averages over branches. Three regimes are covered:
//! linear coupling (breathing), quadratic coupling with a Gaussian coupling
//! spread (decoherence) and quadratic coupling with a truncated-exponential
//! spread (power-law decay).

pub mod continuum;
pub mod discrete;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod numeric;
pub mod output;
pub mod quadrature;
pub mod run;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{CouplingKind, InitialState, OscillatorMoments, PhysicalParams};
pub use output::write_outputs;
pub use run::{run_scenario, RunManifest, RunOutput, TimeSeries};
pub use scenario::{parse_scenario, Case, EnsembleSpec, Method, Scenario};
