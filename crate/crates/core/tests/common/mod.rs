//! Reference solutions shared by the integration tests.

#![allow(dead_code)]

use bec_oscillator::model::{nondimensionalize, OscillatorMoments};
use bec_oscillator::{CouplingKind, PhysicalParams};
use ode_solvers::{Dop853, OutputType, System, Vector5};

/// Ehrenfest equations for `(⟨x⟩, ⟨p⟩, ⟨x²⟩, ⟨p²⟩, ⟨xp+px⟩)` in reduced
/// units under `H = (p² + ω²x²)/4 + f·x/2` scaled so that free motion has
/// unit frequency.
struct MomentOde {
    omega2: f64,
    force: f64,
}

impl System<f64, Vector5<f64>> for MomentOde {
    fn system(&self, _t: f64, y: &Vector5<f64>, dy: &mut Vector5<f64>) {
        let (x, p, x2, p2, c) = (y[0], y[1], y[2], y[3], y[4]);
        let (w2, f) = (self.omega2, self.force);
        dy[0] = p;
        dy[1] = -w2 * x - f;
        dy[2] = c;
        dy[3] = -w2 * c - 2.0 * f * p;
        dy[4] = 2.0 * p2 - 2.0 * w2 * x2 - 2.0 * f * x;
    }
}

/// Integrates one branch numerically and returns reduced moments at `tau`.
pub fn ode_branch(coupling: CouplingKind, e: f64, tau: f64, reduced_init: &OscillatorMoments) -> OscillatorMoments {
    let ode = match coupling {
        CouplingKind::Position => MomentOde { omega2: 1.0, force: 2.0 * e },
        CouplingKind::PositionSquared => MomentOde { omega2: 1.0 + 4.0 * e, force: 0.0 },
    };
    let r = reduced_init;
    let y0 = Vector5::new(r.mean_x, r.mean_p, r.mean_x2, r.mean_p2, r.mean_xp_sym);
    if tau == 0.0 {
        return *r;
    }
    let mut solver = Dop853::new(ode, 0.0, tau, tau, y0, 1e-14, 1e-14);
    // Step-point output: the dense interpolant is not accurate enough here.
    solver.set_output(OutputType::Sparse);
    solver.integrate().expect("oracle integration failed");
    // Step sizes accumulate, so the final abscissa can sit an ulp or two off.
    let end = *solver.x_out().last().unwrap();
    assert!((end - tau).abs() <= 8.0 * f64::EPSILON * tau.max(1.0), "oracle stopped at {end}, wanted {tau}");
    let y = solver.y_out().last().unwrap();
    OscillatorMoments { mean_x: y[0], mean_p: y[1], mean_x2: y[2], mean_p2: y[3], mean_xp_sym: y[4] }
}

pub fn reduced(params: &PhysicalParams, m: &OscillatorMoments) -> OscillatorMoments {
    nondimensionalize(params, m)
}

pub fn moments_close(a: &OscillatorMoments, b: &OscillatorMoments, tol: f64) -> Result<(), String> {
    let pairs = [
        ("mean_x", a.mean_x, b.mean_x),
        ("mean_p", a.mean_p, b.mean_p),
        ("mean_x2", a.mean_x2, b.mean_x2),
        ("mean_p2", a.mean_p2, b.mean_p2),
        ("mean_xp_sym", a.mean_xp_sym, b.mean_xp_sym),
    ];
    for (name, u, v) in pairs {
        if (u - v).abs() > tol * (1.0 + v.abs()) {
            return Err(format!("{name}: {u} vs {v}"));
        }
    }
    Ok(())
}

/// `var_x·var_p − cov²` in physical units.
pub fn uncertainty_determinant(m: &OscillatorMoments) -> f64 {
    m.var_x() * m.var_p() - m.cov_xp().powi(2)
}
