use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fisher::{ParamFamily, StateJet};
use crate::numerics::ComplexMatrix;
use crate::{Error, Result};

/// Parameter order used by every jet in the crate.
pub const PARAM_NAMES: [&str; 2] = ["phi", "gamma_fluct"];

/// Dephased two-level sensor `ρ'(φ, Γ) = ½[[1, c], [c̄, 1]]` with `c = e^{-iφ-Γ²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub phi: f64,
    pub gamma_fluct: f64,
}

/// One eigenpair of the sensor state and its parameter derivatives.
#[derive(Clone, Copy, Debug)]
pub struct SensorEigenpair {
    pub value: f64,
    pub dvalue: [f64; 2],
    pub vector: [Complex64; 2],
    pub dvector: [[Complex64; 2]; 2],
}

impl SensorModel {
    pub fn new(phi: f64, gamma_fluct: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "must be finite",
            });
        }
        if !(gamma_fluct >= 0.0 && gamma_fluct.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma_fluct",
                value: gamma_fluct,
                reason: "must be non-negative and finite",
            });
        }
        Ok(Self { phi, gamma_fluct })
    }

    /// Off-diagonal coherence `e^{-iφ-Γ²}`.
    pub fn coherence(&self) -> Complex64 {
        let g2 = self.gamma_fluct * self.gamma_fluct;
        Complex64::from_polar((-g2).exp(), -self.phi)
    }

    pub fn state(&self) -> ComplexMatrix {
        off_diagonal(Complex64::new(0.5, 0.0), self.coherence() * 0.5)
    }

    /// State with analytic derivatives in `(phi, gamma_fluct)` order.
    pub fn jet(&self) -> StateJet {
        let c = self.coherence();
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        StateJet {
            rho: self.state(),
            drho: vec![
                off_diagonal(zero, -i * c * 0.5),
                off_diagonal(zero, c * (-self.gamma_fluct)),
            ],
        }
    }

    /// Eigenpairs in ascending eigenvalue order: `(1 ∓ e^{-Γ²})/2` with
    /// vectors `(∓e^{-iφ}, 1)/√2`.
    pub fn eigenpairs(&self) -> [SensorEigenpair; 2] {
        let g = self.gamma_fluct;
        let decay = (-g * g).exp();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = Complex64::from_polar(h, -self.phi);
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(h, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let pair = |sign: f64| SensorEigenpair {
            value: 0.5 * (1.0 + sign * decay),
            dvalue: [0.0, -sign * g * decay],
            vector: [e * sign, one],
            dvector: [[-i * e * sign, zero], [zero, zero]],
        };
        [pair(-1.0), pair(1.0)]
    }

    pub fn at(point: &[f64]) -> Result<Self> {
        match point {
            [phi, gamma] => Self::new(*phi, *gamma),
            _ => Err(Error::DimensionMismatch {
                expected: 2,
                got: point.len(),
            }),
        }
    }

    pub fn point(&self) -> [f64; 2] {
        [self.phi, self.gamma_fluct]
    }
}

fn off_diagonal(diag: Complex64, upper: Complex64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = diag;
    m[(1, 1)] = diag;
    m[(0, 1)] = upper;
    m[(1, 0)] = upper.conj();
    m
}

/// Sensor state and its derivatives; rejects negative `gamma_fluct`.
pub fn sensor_state(model: &SensorModel) -> Result<StateJet> {
    let checked = SensorModel::new(model.phi, model.gamma_fluct)?;
    Ok(checked.jet())
}

/// The sensor channel as a two-parameter family over `(phi, gamma_fluct)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SensorFamily;

impl ParamFamily for SensorFamily {
    fn param_names(&self) -> &[&'static str] {
        &PARAM_NAMES
    }

    fn eval(&self, point: &[f64]) -> Result<StateJet> {
        Ok(SensorModel::at(point)?.jet())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pure_initial_state() {
        let rho = SensorModel::new(0.0, 0.0).unwrap().state();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(rho.max_abs_diff(&expected).unwrap() < 1e-16);
    }

    #[test]
    fn phase_flip() {
        let rho = SensorModel::new(PI, 0.0).unwrap().state();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(rho.max_abs_diff(&expected).unwrap() < 1e-16);
    }

    #[test]
    fn coherence_magnitude() {
        let rho = SensorModel::new(0.3, 0.5).unwrap().state();
        // e^{-1/4}/2
        assert!((rho[(0, 1)].norm() - 0.389_400_391_535_702_4).abs() < 1e-15);
        rho.check_density().unwrap();
    }

    #[test]
    fn rejects_negative_fluctuation() {
        assert!(SensorModel::new(0.0, -0.1).is_err());
        let bad = SensorModel {
            phi: 0.0,
            gamma_fluct: -1.0,
        };
        assert!(sensor_state(&bad).is_err());
    }

    #[test]
    fn eigenpairs_diagonalize() {
        let s = SensorModel::new(0.3, 0.5).unwrap();
        let rho = s.state();
        for p in s.eigenpairs() {
            for r in 0..2 {
                let lhs: Complex64 = (0..2).map(|k| rho[(r, k)] * p.vector[k]).sum();
                assert!((lhs - p.vector[r] * p.value).norm() < 1e-15);
            }
        }
        let [low, high] = s.eigenpairs();
        assert!((high.value - 0.889_400_391_535_702_4).abs() < 1e-15);
        assert!((low.value - 0.110_599_608_464_297_6).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let (phi, g, h) = (0.7, 0.45, 1e-6);
        let jet = SensorModel::new(phi, g).unwrap().jet();
        let fd = |a: [f64; 2], b: [f64; 2]| {
            let hi = SensorModel::at(&a).unwrap().state();
            let lo = SensorModel::at(&b).unwrap().state();
            (&hi - &lo).scale_real(0.5 / h)
        };
        let dphi = fd([phi + h, g], [phi - h, g]);
        let dg = fd([phi, g + h], [phi, g - h]);
        assert!(jet.drho[0].max_abs_diff(&dphi).unwrap() < 1e-9);
        assert!(jet.drho[1].max_abs_diff(&dg).unwrap() < 1e-9);
        jet.validate().unwrap();
    }
}
