use num_complex::Complex64;
use serde::Serialize;

use super::{x_coth_x, Domain, Flagged, SMALL_GAMMA};
use crate::model::ModeLabel;
use crate::numerics::{ComplexMatrix, RealMatrix};
use crate::{Error, Result};

/// Below this `|sin θ|` the pointer starts in a basis state and carries no information.
const BASIS_STATE_SIN: f64 = 1e-12;

/// Point in the qubit-pointer parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitParams {
    pub theta: f64,
    pub gamma_fluct: f64,
    pub gamma_ps: f64,
    pub phi: f64,
    /// Angle of the projective readout basis.
    pub theta_meas: f64,
}

impl QubitParams {
    pub fn new(theta: f64, gamma_fluct: f64, gamma_ps: f64, phi: f64, theta_meas: f64) -> Result<Self> {
        if !(gamma_fluct >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma_fluct",
                value: gamma_fluct,
                reason: "must be non-negative",
            });
        }
        for (name, v) in [("theta", theta), ("gamma_ps", gamma_ps), ("phi", phi), ("theta_meas", theta_meas)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        Ok(Self {
            theta,
            gamma_fluct,
            gamma_ps,
            phi,
            theta_meas,
        })
    }
}

fn sign(label: ModeLabel) -> f64 {
    match label {
        ModeLabel::Success => 1.0,
        ModeLabel::Failure(_) => -1.0,
    }
}

/// `½(1 ∓ e^{-Γ²} cos θ sin γ cos φ)`.
pub fn qubit_w(p: &QubitParams, label: ModeLabel) -> f64 {
    let decay = (-p.gamma_fluct * p.gamma_fluct).exp();
    0.5 * (1.0 - sign(label) * decay * p.theta.cos() * p.gamma_ps.sin() * p.phi.cos())
}

pub fn qubit_w_success(p: &QubitParams) -> f64 {
    qubit_w(p, ModeLabel::Success)
}

/// Which angle appears next to `cos θ` in the commutator-trace denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CommutatorReading {
    /// `e^{Γ²} ∓ cos θ sin γ cos φ`, consistent with the mode weights.
    SinGamma,
    /// `e^{Γ²} ∓ cos θ sin θ cos φ`.
    SinTheta,
}

/// `Tr ρ^△ [L_φ, L_Γ]` for the success and failure modes.
pub fn qubit_commutator_traces(p: &QubitParams, reading: CommutatorReading) -> Flagged<[Complex64; 2]> {
    let g = p.gamma_fluct;
    let e = (g * g).exp();
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma_ps.sin_cos();
    let inner = match reading {
        CommutatorReading::SinGamma => sg,
        CommutatorReading::SinTheta => st,
    };
    let num = 4.0 * g * e * st * st * sg * sg * cg;
    let trace = |s: f64| {
        let d = e - s * ct * inner * p.phi.cos();
        Complex64::new(0.0, -s * num / (d * d * d))
    };
    Flagged::new([trace(1.0), trace(-1.0)], Domain::General, p.gamma_ps, p.phi)
}

/// `sin²θ / (e^{2Γ²} - cos²θ)`, written to stay accurate near `Γ = 0`.
fn visibility_ratio(theta: f64, gamma_fluct: f64) -> Option<f64> {
    let st = theta.sin();
    if st.abs() < BASIS_STATE_SIN {
        return None;
    }
    let s2 = st * st;
    Some(s2 / ((2.0 * gamma_fluct * gamma_fluct).exp_m1() + s2))
}

/// pQFIM of the qubit pointer at balanced postselection and small phase.
pub fn qubit_q(theta: f64, gamma_fluct: f64) -> RealMatrix {
    let Some(r) = visibility_ratio(theta, gamma_fluct) else {
        return RealMatrix::zeros(2);
    };
    let x = gamma_fluct * gamma_fluct;
    RealMatrix::from_diag(&[r, 2.0 * (x + x_coth_x(x)) * r])
}

/// `(Tr[Q H^-1], Tr[F H^-1])` for the θ'-projective readout; the classical value is half.
pub fn qubit_tradeoffs(theta: f64, gamma_fluct: f64) -> (f64, f64) {
    let Some(r) = visibility_ratio(theta, gamma_fluct) else {
        return (0.0, 0.0);
    };
    let quantum = 2.0 * (2.0 * gamma_fluct * gamma_fluct).exp() * r;
    (quantum, 0.5 * quantum)
}

/// Conditional pointer state of one mode with its SLDs and derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMatrices {
    pub label: ModeLabel,
    pub rho: ComplexMatrix,
    /// `∂_φ ρ`, `∂_Γ ρ`.
    pub drho: [ComplexMatrix; 2],
    pub l_phi: ComplexMatrix,
    /// Undefined at `Γ = 0`, where the sensor is pure and the Γ-SLD diverges.
    pub l_gamma: Option<ComplexMatrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMatrices {
    pub success: ModeMatrices,
    pub failure: ModeMatrices,
}

/// Closed-form conditional states and SLDs of both modes.
pub fn qubit_conditional_matrices(p: &QubitParams) -> ConditionalMatrices {
    let (sg, cg) = p.gamma_ps.sin_cos();
    // the failure postselector is the success one at γ + π
    ConditionalMatrices {
        success: mode_matrices(p, ModeLabel::Success, sg, cg),
        failure: mode_matrices(p, ModeLabel::Failure(0), -sg, -cg),
    }
}

fn mode_matrices(p: &QubitParams, label: ModeLabel, sg: f64, cg: f64) -> ModeMatrices {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let g = p.gamma_fluct;
    let x = g * g;
    let e = x.exp();
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let s2 = (0.5 * p.theta).sin().powi(2);
    let c2 = (0.5 * p.theta).cos().powi(2);
    let d = e - ct * sg * cp;

    let n01 = c(-st * sg * sp, -st * e * cg) * 0.5;
    let num = ComplexMatrix::from_rows(&[
        vec![c(s2 * (e + sg * cp), 0.0), n01],
        vec![n01.conj(), c(c2 * (e - sg * cp), 0.0)],
    ])
    .expect("2x2");
    let rho = num.scale_real(1.0 / d);

    let dn01_phi = c(-0.5 * st * sg * cp, 0.0);
    let dn01_gamma = c(0.0, -st * cg * g * e);
    let dnum = [
        ComplexMatrix::from_rows(&[
            vec![c(-s2 * sg * sp, 0.0), dn01_phi],
            vec![dn01_phi.conj(), c(c2 * sg * sp, 0.0)],
        ]),
        ComplexMatrix::from_rows(&[
            vec![c(2.0 * g * e * s2, 0.0), dn01_gamma],
            vec![dn01_gamma.conj(), c(2.0 * g * e * c2, 0.0)],
        ]),
    ]
    .map(|m| m.expect("2x2"));
    let dd = [ct * sg * sp, 2.0 * g * e];
    let drho = [0, 1].map(|a| (&dnum[a] - &rho.scale_real(dd[a])).scale_real(1.0 / d));

    let off = c(-st * sg * cp / d, 0.0);
    let l_phi = ComplexMatrix::from_rows(&[
        vec![c(-2.0 * c2 * sg * sp / d, 0.0), off],
        vec![off, c(2.0 * s2 * sg * sp / d, 0.0)],
    ])
    .expect("2x2");

    let l_gamma = (g >= SMALL_GAMMA).then(|| {
        // Γ e (coth Γ² - 1) = 2 e Γ / (e^{2Γ²} - 1)
        let pre = 2.0 * e * g / (2.0 * x).exp_m1() / d;
        let m01 = c(st * e * sg * sp, st * cg);
        ComplexMatrix::from_rows(&[
            vec![c(2.0 * c2 * (1.0 - e * sg * cp), 0.0), m01],
            vec![m01.conj(), c(2.0 * s2 * (1.0 + e * sg * cp), 0.0)],
        ])
        .expect("2x2")
        .scale_real(pre)
    });

    ModeMatrices {
        label,
        rho,
        drho,
        l_phi,
        l_gamma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::sensor_h;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn params(theta: f64, g: f64, gamma_ps: f64, phi: f64) -> QubitParams {
        QubitParams::new(theta, g, gamma_ps, phi, FRAC_PI_2).unwrap()
    }

    fn sld_residual(l: &ComplexMatrix, rho: &ComplexMatrix, drho: &ComplexMatrix) -> f64 {
        let lhs = &(l * rho) + &(rho * l);
        lhs.max_abs_diff(&drho.scale_real(2.0)).unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(qubit_w_success(&params(FRAC_PI_2, 0.7, 1.1, 0.3)), 0.5);
        let w = qubit_w_success(&params(FRAC_PI_3, 0.0, FRAC_PI_2, 0.0));
        assert!((w - 0.25).abs() < 1e-15);
        let p = params(1.1, 0.4, 0.8, -0.6);
        assert!((qubit_w(&p, ModeLabel::Success) + qubit_w(&p, ModeLabel::Failure(0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_values() {
        let q = qubit_q(FRAC_PI_3, 0.3);
        assert!((q[(0, 0)] - 1.0 / (0.18f64.exp() * 4.0 / 3.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((q[(0, 0)] - 0.791_792_918_077_4).abs() < 1e-12);
        assert_eq!(q[(0, 1)], 0.0);
        assert_eq!(qubit_q(0.0, 0.4), RealMatrix::zeros(2));
        assert_eq!(qubit_q(0.0, 0.0), RealMatrix::zeros(2));
        let q = qubit_q(FRAC_PI_2, 0.0);
        assert_eq!(q, RealMatrix::from_diag(&[1.0, 2.0]));
    }

    #[test]
    fn balanced_pointer_matches_sensor() {
        for g in [0.05, 0.3, 1.0, 1.7] {
            let diff = qubit_q(FRAC_PI_2, g).max_abs_diff(&sensor_h(g)).unwrap();
            assert!(diff < 1e-14, "Γ={g}: {diff}");
        }
    }

    #[test]
    fn tradeoff_values() {
        let (q, c) = qubit_tradeoffs(FRAC_PI_4, 0.5);
        assert!((q - 2.0 / (2.0 - (-0.5f64).exp())).abs() < 1e-14);
        assert!((q - 1.435_266_598_393_6).abs() < 1e-12);
        assert_eq!(c, 0.5 * q);
        let (q, _) = qubit_tradeoffs(FRAC_PI_3, 0.3);
        assert!((q - 6.0 / (4.0 - (-0.18f64).exp())).abs() < 1e-14);
        assert!((q - 1.895_896_459_038_8).abs() < 1e-12);
        let (q, c) = qubit_tradeoffs(FRAC_PI_2, 0.8);
        assert!((q - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tradeoff_and_fsic_from_q() {
        for (t, g) in [(0.3, 0.2), (1.2, 0.9), (2.5, 0.05), (FRAC_PI_3, 1.4)] {
            let q = qubit_q(t, g);
            let h = sensor_h(g);
            let (rp, rg) = (q[(0, 0)] / h[(0, 0)], q[(1, 1)] / h[(1, 1)]);
            assert!((rp - rg).abs() < 1e-10 * rp.max(1.0));
            assert!((rp + rg - qubit_tradeoffs(t, g).0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_gamma_is_continuous() {
        for t in [0.4, FRAC_PI_2, 2.0] {
            let near = qubit_q(t, SMALL_GAMMA);
            let zero = qubit_q(t, 0.0);
            assert!(near.max_abs_diff(&zero).unwrap() < 1e-5);
        }
        let q = qubit_q(1e-6, 0.3);
        assert!(q.max_abs() < 1e-5);
    }

    #[test]
    fn commutator_traces() {
        let t = qubit_commutator_traces(&params(FRAC_PI_2, 0.1, FRAC_PI_4, 0.0), CommutatorReading::SinGamma);
        assert!((t.value[0] - Complex64::new(0.0, -0.138_621_025_761_052_8)).norm() < 1e-15);
        assert!((t.value[1] + t.value[0]).norm() < 1e-15);
        for reading in [CommutatorReading::SinGamma, CommutatorReading::SinTheta] {
            let t = qubit_commutator_traces(&params(1.0, 0.4, FRAC_PI_2, 0.3), reading);
            assert!(t.value.iter().all(|z| z.norm() < 1e-15));
            let t = qubit_commutator_traces(&params(0.0, 0.4, 0.6, 0.3), reading);
            assert!(t.value.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn commutator_matches_matrices() {
        let p = params(1.0, 0.4, 0.6, 0.3);
        let m = qubit_conditional_matrices(&p);
        let t = qubit_commutator_traces(&p, CommutatorReading::SinGamma).value;
        for (mode, expected) in [(&m.success, t[0]), (&m.failure, t[1])] {
            let lg = mode.l_gamma.as_ref().unwrap();
            let comm = &(&mode.l_phi * lg) - &(lg * &mode.l_phi);
            let got = mode.rho.trace_product(&comm).unwrap();
            assert!((got - expected).norm() < 1e-12, "{got} vs {expected}");
        }
        let alt = qubit_commutator_traces(&p, CommutatorReading::SinTheta).value;
        assert!((alt[0] - t[0]).norm() > 0.1);
    }

    #[test]
    fn balanced_basis_case() {
        let m = qubit_conditional_matrices(&params(FRAC_PI_2, 0.0, FRAC_PI_2, 0.0));
        let pure = ComplexMatrix::from_diag(&[1.0, 0.0]);
        assert!(m.success.rho.max_abs_diff(&pure).unwrap() < 1e-15);
        assert!(m.success.l_gamma.is_none());
    }

    #[test]
    fn matrices_satisfy_sld_equation() {
        let draws = [
            (1.0, 0.4, 0.6, 0.3),
            (0.8, 0.5, 2.0, 0.2),
            (2.1, 0.9, 1.3, -0.7),
            (FRAC_PI_3, 0.3, FRAC_PI_2, 1e-6),
            (2.9, 1.5, 4.0, 2.5),
        ];
        for (t, g, gp, phi) in draws {
            let m = qubit_conditional_matrices(&params(t, g, gp, phi));
            for mode in [&m.success, &m.failure] {
                mode.rho.check_density().unwrap();
                assert!(sld_residual(&mode.l_phi, &mode.rho, &mode.drho[0]) < 1e-12);
                let lg = mode.l_gamma.as_ref().unwrap();
                assert!(sld_residual(lg, &mode.rho, &mode.drho[1]) < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let (t, g, gp, phi) = (1.3, 0.6, 0.9, 0.4);
        let h = 1e-6;
        let m = qubit_conditional_matrices(&params(t, g, gp, phi));
        let fd = |dp: f64, dg: f64| {
            let plus = qubit_conditional_matrices(&params(t, g + dg, gp, phi + dp)).success.rho;
            let minus = qubit_conditional_matrices(&params(t, g - dg, gp, phi - dp)).success.rho;
            (&plus - &minus).scale_real(0.5 / h)
        };
        assert!(fd(h, 0.0).max_abs_diff(&m.success.drho[0]).unwrap() < 1e-8);
        assert!(fd(0.0, h).max_abs_diff(&m.success.drho[1]).unwrap() < 1e-8);
    }

    #[test]
    fn failure_is_shifted_success() {
        let p = params(0.7, 0.5, 1.1, 0.25);
        let shifted = params(0.7, 0.5, 1.1 + PI, 0.25);
        let a = qubit_conditional_matrices(&p).failure;
        let b = qubit_conditional_matrices(&shifted).success;
        assert!(a.rho.max_abs_diff(&b.rho).unwrap() < 1e-14);
        assert!(a.l_phi.max_abs_diff(&b.l_phi).unwrap() < 1e-14);
    }
}
