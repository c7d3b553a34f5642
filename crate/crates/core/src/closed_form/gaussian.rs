use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{x_csch_x, Domain, Flagged, SMALL_GAMMA};
use crate::model::ModeLabel;
use crate::numerics::RealMatrix;
use crate::{Error, Result};

/// Point in the Gaussian-pointer parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianParams {
    pub sigma: f64,
    pub gamma_fluct: f64,
    pub gamma_ps: f64,
    pub phi: f64,
}

impl GaussianParams {
    pub fn new(sigma: f64, gamma_fluct: f64, gamma_ps: f64, phi: f64) -> Result<Self> {
        pointer_phase_scale(sigma)?;
        if !(gamma_fluct >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma_fluct",
                value: gamma_fluct,
                reason: "must be non-negative",
            });
        }
        Ok(Self {
            sigma,
            gamma_fluct,
            gamma_ps,
            phi,
        })
    }
}

/// `A = π² / (8σ²)`, the pointer's phase-washout exponent.
pub fn pointer_phase_scale(sigma: f64) -> Result<f64> {
    let a = PI * PI / (8.0 * sigma * sigma);
    if !(sigma > 0.0 && a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            reason: "phase scale must be finite and positive",
        });
    }
    Ok(a)
}

/// `sinh A / sinh(A + x)` without overflow for large `A`.
fn sinh_ratio(a: f64, x: f64) -> f64 {
    (-x).exp() * (-2.0 * a).exp_m1() / (-2.0 * (a + x)).exp_m1()
}

/// Mode weight `½(1 ± e^{-Γ²-A} cos φ sin γ)`.
pub fn gaussian_w(p: &GaussianParams, label: ModeLabel) -> Result<f64> {
    let a = pointer_phase_scale(p.sigma)?;
    let sign = mode_sign(label);
    let x = p.gamma_fluct * p.gamma_fluct;
    Ok(0.5 * (1.0 + sign * (-x - a).exp() * p.phi.cos() * p.gamma_ps.sin()))
}

pub fn gaussian_w_success(p: &GaussianParams) -> Result<f64> {
    gaussian_w(p, ModeLabel::Success)
}

/// pQFIM of the Gaussian pointer, valid for balanced postselection at small phase.
pub fn gaussian_q(gamma_fluct: f64, sigma: f64) -> Result<RealMatrix> {
    let a = pointer_phase_scale(sigma)?;
    let x = gamma_fluct * gamma_fluct;
    if gamma_fluct < SMALL_GAMMA {
        // both ratios tend to one as Γ → 0
        return Ok(RealMatrix::from_diag(&[1.0, 2.0]));
    }
    let r = sinh_ratio(a, x);
    Ok(RealMatrix::from_diag(&[(-x).exp() * r, 2.0 * x_csch_x(x) * r]))
}

/// `Tr[Q H^-1] = 2 e^{Γ²} sinh A / sinh(Γ² + A)`.
pub fn gaussian_tradeoff_quantum(gamma_fluct: f64, sigma: f64) -> Result<f64> {
    let a = pointer_phase_scale(sigma)?;
    let x = gamma_fluct * gamma_fluct;
    // e^{Γ²} cancels against the ratio's own e^{-Γ²}
    Ok(2.0 * (-2.0 * a).exp_m1() / (-2.0 * (a + x)).exp_m1())
}

/// Conditional momentum density of a mode; the failure mode flips `sin γ`.
pub fn gaussian_momentum_pdf(momentum: f64, label: ModeLabel, p: &GaussianParams) -> Result<f64> {
    let a = pointer_phase_scale(p.sigma)?;
    let s2 = p.sigma * p.sigma;
    let x = p.gamma_fluct * p.gamma_fluct;
    let sg = mode_sign(label) * p.gamma_ps.sin();
    let envelope = (2.0 * s2 / PI).sqrt() * (-2.0 * momentum * momentum * s2).exp();
    Ok(envelope * (x.exp() + sg * (PI * momentum + p.phi).cos()) / (x.exp() + (-a).exp() * sg * p.phi.cos()))
}

/// Pointer-mode geometry of one postselection mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeGeometry {
    pub label: ModeLabel,
    /// `⟨ξ_1|ξ_2⟩` (small phase, any `gamma_ps`).
    pub overlap: f64,
    /// `N_k = ⟨ξ_k|ξ_k⟩` (balanced).
    pub norms: [f64; 2],
    /// `dphi[m][n] = ⟨ξ_m|∂_φ ξ_n⟩` (balanced).
    pub dphi: [[Complex64; 2]; 2],
    /// `dgamma[m][n] = ⟨ξ_m|∂_Γ ξ_n⟩` (balanced).
    pub dgamma: [[f64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianModeGeometry {
    /// Sensor eigenvalues `(1 ∓ e^{-Γ²})/2`.
    pub lambda: [f64; 2],
    pub modes: [ModeGeometry; 2],
}

/// Closed-form inner products of the conditional pointer components.
pub fn gaussian_mode_geometry(p: &GaussianParams) -> Result<Flagged<GaussianModeGeometry>> {
    let a = pointer_phase_scale(p.sigma)?;
    let g = p.gamma_fluct;
    let x = g * g;
    let ex = x.exp();
    let exa = (x + a).exp();
    let ea = a.exp();
    let decay = (-x).exp();
    let sg = p.gamma_ps.sin();
    let cg = p.gamma_ps.cos();
    let i = Complex64::new(0.0, 1.0);

    let mode = |label: ModeLabel| {
        let s = mode_sign(label);
        // the failure mode replaces 1 + e^{x+A} by 1 - e^{x+A}
        let den = 1.0 + s * exa;
        let n1 = 1.0 - (1.0 + ex) / den;
        let n2 = 1.0 + (ex - 1.0) / den;
        let (d11, d22) = if s > 0.0 {
            ((ea - 1.0) * ex * g / (den * den), (ea + 1.0) * ex * g / (den * den))
        } else {
            (-(1.0 + ea) * ex * g / (den * den), (1.0 - ea) * ex * g / (den * den))
        };
        ModeGeometry {
            label,
            overlap: s * exa * cg / (exa + s * sg),
            norms: [n1, n2],
            dphi: [[-i * 0.5 * n1, i * 0.5 * n1], [i * 0.5 * n2, -i * 0.5 * n2]],
            dgamma: [[d11, 0.0], [0.0, d22]],
        }
    };
    let value = GaussianModeGeometry {
        lambda: [0.5 * (1.0 - decay), 0.5 * (1.0 + decay)],
        modes: [mode(ModeLabel::Success), mode(ModeLabel::Failure(0))],
    };
    Ok(Flagged::new(value, Domain::BalancedSmallPhase, p.gamma_ps, p.phi))
}

fn mode_sign(label: ModeLabel) -> f64 {
    match label {
        ModeLabel::Success => 1.0,
        ModeLabel::Failure(_) => -1.0,
    }
}
