//! Analytic results for the two pointer models.
//!
//! Several formulas only hold for balanced postselection (`gamma_ps = π/2`)
//! and/or in the small-phase limit. Functions that take those angles return a
//! [`Flagged`] value recording whether the inputs were inside the formula's
//! domain; the value itself is always evaluated.

mod gaussian;
mod qubit;

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::numerics::RealMatrix;

pub use gaussian::{
    gaussian_mode_geometry, gaussian_momentum_pdf, gaussian_q, gaussian_tradeoff_quantum, gaussian_w,
    gaussian_w_success, pointer_phase_scale, GaussianModeGeometry, GaussianParams, ModeGeometry,
};
pub use qubit::{
    qubit_commutator_traces, qubit_conditional_matrices, qubit_q, qubit_tradeoffs, qubit_w, qubit_w_success,
    CommutatorReading, ConditionalMatrices, ModeMatrices, QubitParams,
};

/// Limit branches are taken below this `gamma_fluct`.
pub const SMALL_GAMMA: f64 = 1e-6;
/// `|phi|` up to which the small-phase formulas are considered in domain.
pub const SMALL_PHASE: f64 = 1e-4;
/// Allowed distance of `gamma_ps` from π/2 for balanced formulas.
pub const BALANCED_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Domain {
    General,
    SmallPhase,
    Balanced,
    BalancedSmallPhase,
}

impl Domain {
    pub fn contains(self, gamma_ps: f64, phi: f64) -> bool {
        let balanced = (gamma_ps - FRAC_PI_2).abs() <= BALANCED_TOL;
        let small = phi.abs() <= SMALL_PHASE;
        match self {
            Self::General => true,
            Self::SmallPhase => small,
            Self::Balanced => balanced,
            Self::BalancedSmallPhase => balanced && small,
        }
    }
}

/// A closed-form value together with its domain of validity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flagged<T> {
    pub value: T,
    pub domain: Domain,
    pub in_domain: bool,
}

impl<T> Flagged<T> {
    pub fn new(value: T, domain: Domain, gamma_ps: f64, phi: f64) -> Self {
        Self {
            value,
            domain,
            in_domain: domain.contains(gamma_ps, phi),
        }
    }
}

/// Sensor QFIM `diag(e^{-2Γ²}, 4Γ²/(e^{2Γ²} - 1))`.
pub fn sensor_h(gamma_fluct: f64) -> RealMatrix {
    let x = gamma_fluct * gamma_fluct;
    if gamma_fluct < SMALL_GAMMA {
        return RealMatrix::from_diag(&[1.0, 2.0]);
    }
    RealMatrix::from_diag(&[(-2.0 * x).exp(), 2.0 * (2.0 * x) / (2.0 * x).exp_m1()])
}

/// `x coth x`, equal to 1 at the origin.
pub(crate) fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// `x / sinh x`, equal to 1 at the origin.
pub(crate) fn x_csch_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x / x.sinh()
    }
}
