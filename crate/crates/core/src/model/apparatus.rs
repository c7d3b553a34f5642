use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::fisher::StateJet;
use crate::numerics::{ComplexMatrix, QuadratureGrid};
use crate::{Error, Result};

/// Default sensor/apparatus coupling strength.
pub const DEFAULT_COUPLING: f64 = FRAC_PI_2;

#[derive(Clone, Debug, PartialEq)]
pub enum MaKind {
    /// Qubit pointer prepared in `sin(θ/2)|0⟩ + cos(θ/2)|1⟩`, coupled through `|1⟩⟨1|`.
    Qubit { theta: f64 },
    /// Gaussian pointer `(2σ²/π)^{1/4} e^{-p²σ²}` on a momentum grid, coupled through `p`.
    Gaussian { sigma: f64, grid: Arc<QuadratureGrid> },
}

/// Measurement apparatus with the interaction `exp(-i g σ_z ⊗ M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaModel {
    pub kind: MaKind,
    pub coupling: f64,
}

impl MaModel {
    pub fn qubit(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must be finite",
            });
        }
        Ok(Self {
            kind: MaKind::Qubit { theta },
            coupling: DEFAULT_COUPLING,
        })
    }

    pub fn gaussian(sigma: f64, grid_points: usize) -> Result<Self> {
        let grid = QuadratureGrid::for_gaussian(sigma, grid_points)?;
        Ok(Self {
            kind: MaKind::Gaussian {
                sigma,
                grid: Arc::new(grid),
            },
            coupling: DEFAULT_COUPLING,
        })
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "coupling",
                value: coupling,
                reason: "must be finite",
            });
        }
        self.coupling = coupling;
        Ok(self)
    }

    /// Hilbert-space dimension of the apparatus.
    pub fn dim(&self) -> usize {
        match &self.kind {
            MaKind::Qubit { .. } => 2,
            MaKind::Gaussian { grid, .. } => grid.len(),
        }
    }

    pub fn grid(&self) -> Option<&Arc<QuadratureGrid>> {
        match &self.kind {
            MaKind::Qubit { .. } => None,
            MaKind::Gaussian { grid, .. } => Some(grid),
        }
    }

    /// Eigenvalues of the coupled observable `M` in the apparatus basis.
    pub fn observable_spectrum(&self) -> Vec<f64> {
        match &self.kind {
            MaKind::Qubit { .. } => vec![0.0, 1.0],
            MaKind::Gaussian { grid, .. } => grid.points().to_vec(),
        }
    }

    /// Pointer wavefunction sampled on the grid and normalized in the grid
    /// inner product. For the qubit the "grid" is the computational basis.
    pub fn initial_amplitudes(&self) -> Result<Vec<Complex64>> {
        match &self.kind {
            MaKind::Qubit { theta } => Ok(vec![
                Complex64::new((theta / 2.0).sin(), 0.0),
                Complex64::new((theta / 2.0).cos(), 0.0),
            ]),
            MaKind::Gaussian { sigma, grid } => {
                let c = (2.0 * sigma * sigma / PI).powf(0.25);
                let mut f: Vec<Complex64> = grid
                    .points()
                    .iter()
                    .map(|p| Complex64::new(c * (-p * p * sigma * sigma).exp(), 0.0))
                    .collect();
                grid.normalize(&mut f)?;
                Ok(f)
            }
        }
    }

    /// Initial pointer in orthonormal coordinates `u_i = √w_i f(p_i)`.
    pub fn initial_state(&self) -> Result<Vec<Complex64>> {
        let f = self.initial_amplitudes()?;
        Ok(match &self.kind {
            MaKind::Qubit { .. } => f,
            MaKind::Gaussian { grid, .. } => f
                .iter()
                .zip(grid.weights())
                .map(|(z, w)| z * w.sqrt())
                .collect(),
        })
    }

    /// Diagonal of `exp(-i g s M)` for sensor eigenvalue `s = ±1`.
    pub fn interaction_phases(&self, sensor_sign: f64) -> Vec<Complex64> {
        let g = self.coupling;
        self.observable_spectrum()
            .iter()
            .map(|m| Complex64::from_polar(1.0, -g * sensor_sign * m))
            .collect()
    }
}

/// `σ_z` eigenvalue of sensor basis state `s`.
pub(crate) fn sensor_sign(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

fn evolve(op: &ComplexMatrix, ma: &MaModel, xi: &[Complex64]) -> ComplexMatrix {
    let n = xi.len();
    let phases = [ma.interaction_phases(sensor_sign(0)), ma.interaction_phases(sensor_sign(1))];
    ComplexMatrix::from_fn(2 * n, |r, c| {
        let (s, i) = (r / n, r % n);
        let (t, j) = (c / n, c % n);
        op[(s, t)] * (xi[i] * xi[j].conj()) * (phases[s][i] * phases[t][j].conj())
    })
}

/// `U (ρ' ⊗ |ξ⟩⟨ξ|) U†` with joint index `s·N + i`.
pub fn joint_state(sensor: &ComplexMatrix, ma: &MaModel) -> Result<ComplexMatrix> {
    if sensor.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: sensor.dim(),
        });
    }
    let xi = ma.initial_state()?;
    Ok(evolve(sensor, ma, &xi))
}

/// Joint state with derivatives; the unitary is parameter independent.
pub fn joint_jet(sensor: &StateJet, ma: &MaModel) -> Result<StateJet> {
    if sensor.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: sensor.dim(),
        });
    }
    let xi = ma.initial_state()?;
    StateJet::new(
        evolve(&sensor.rho, ma, &xi),
        sensor.drho.iter().map(|d| evolve(d, ma, &xi)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SensorModel;

    #[test]
    fn zero_coupling_is_product_state() {
        let ma = MaModel::qubit(0.8).unwrap().with_coupling(0.0).unwrap();
        let rho = SensorModel::new(0.3, 0.2).unwrap().state();
        let joint = joint_state(&rho, &ma).unwrap();
        let xi = ma.initial_state().unwrap();
        let expected = rho.kron(&ComplexMatrix::outer(&xi, &xi).unwrap());
        assert_eq!(joint.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn basis_pointer_picks_up_relative_phase() {
        // θ = 0 puts the pointer in |1⟩, so only the coupled sector is populated
        let g = 0.3;
        let ma = MaModel::qubit(0.0).unwrap().with_coupling(g).unwrap();
        let rho = SensorModel::new(0.0, 0.0).unwrap().state();
        let joint = joint_state(&rho, &ma).unwrap();
        let coh = joint[(1, 3)];
        assert!((coh - Complex64::from_polar(0.5, -2.0 * g)).norm() < 1e-15);
        assert!(joint[(0, 0)].norm() < 1e-15);
        assert!((joint.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_joint_preserves_purity() {
        let ma = MaModel::gaussian(0.8, 64).unwrap();
        let gamma: f64 = 0.5;
        let rho = SensorModel::new(0.3, gamma).unwrap().state();
        let joint = joint_state(&rho, &ma).unwrap();
        assert!((joint.trace().re - 1.0).abs() < 1e-10);
        let purity = joint.trace_product(&joint).unwrap().re;
        let expected = 0.5 * (1.0 + (-2.0 * gamma * gamma).exp());
        assert!((purity - expected).abs() < 1e-8);
    }

    #[test]
    fn gaussian_pointer_is_normalized() {
        let ma = MaModel::gaussian(0.3, 2048).unwrap();
        let u = ma.initial_state().unwrap();
        let n: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
