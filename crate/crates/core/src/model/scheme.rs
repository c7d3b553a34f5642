use num_complex::Complex64;

use super::apparatus::{joint_jet, sensor_sign, MaKind, MaModel};
use super::postselection::{postselect, postselect_low_rank, ModeEnsemble, ModeLabel, PostselectionSpec};
use super::povm::{OutcomeJet, Povm};
use super::sensor::SensorModel;
use crate::numerics::ComplexMatrix;
use crate::{Error, Result};

/// Step used by the finite-difference cross-check, relative to `max(1, |x|)`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub enum Measurement {
    /// Qubit projective measurement on `cos(θ'/2)|0⟩ + sin(θ'/2)|1⟩`.
    Projective { theta_meas: f64 },
    /// Momentum measurement of a grid pointer.
    Momentum,
    /// Arbitrary POVM on the apparatus.
    Elements(Vec<ComplexMatrix>),
}

/// A full measurement scheme: apparatus, postselection and pointer readout.
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub ma: MaModel,
    pub ps: PostselectionSpec,
    pub measurement: Measurement,
}

impl Scheme {
    pub fn new(ma: MaModel, ps: PostselectionSpec, measurement: Measurement) -> Result<Self> {
        match (&ma.kind, &measurement) {
            (MaKind::Gaussian { .. }, Measurement::Projective { .. }) => {
                return Err(Error::Unsupported("projective qubit readout on a Gaussian pointer".into()))
            }
            (MaKind::Qubit { .. }, Measurement::Momentum) => {
                return Err(Error::Unsupported("momentum readout on a qubit pointer".into()))
            }
            (_, Measurement::Elements(e)) => {
                Povm::elements(e.clone())?;
                if e[0].dim() != ma.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: ma.dim(),
                        got: e[0].dim(),
                    });
                }
            }
            _ => {}
        }
        Ok(Self { ma, ps, measurement })
    }

    pub fn qubit(theta: f64, gamma_ps: f64, theta_meas: f64) -> Result<Self> {
        Self::new(
            MaModel::qubit(theta)?,
            PostselectionSpec::new(gamma_ps)?,
            Measurement::Projective { theta_meas },
        )
    }

    pub fn gaussian(sigma: f64, gamma_ps: f64, grid_points: usize) -> Result<Self> {
        Self::new(
            MaModel::gaussian(sigma, grid_points)?,
            PostselectionSpec::new(gamma_ps)?,
            Measurement::Momentum,
        )
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        self.ma = self.ma.with_coupling(coupling)?;
        Ok(self)
    }

    pub fn povm(&self) -> Povm {
        match &self.measurement {
            Measurement::Projective { theta_meas } => Povm::qubit_projective(*theta_meas),
            Measurement::Momentum => Povm::Momentum,
            Measurement::Elements(e) => Povm::Elements(e.clone()),
        }
    }

    /// Mode ensemble by the cheapest exact route: dense for the qubit,
    /// low-rank for a grid pointer.
    pub fn ensemble(&self, sensor: &SensorModel) -> Result<ModeEnsemble> {
        match (&self.ma.kind, &self.measurement) {
            (MaKind::Gaussian { .. }, Measurement::Momentum) => postselect_low_rank(sensor, &self.ma, &self.ps),
            _ => self.ensemble_dense(sensor),
        }
    }

    /// Mode ensemble from the full joint density matrix.
    pub fn ensemble_dense(&self, sensor: &SensorModel) -> Result<ModeEnsemble> {
        let joint = joint_jet(&sensor.jet(), &self.ma)?;
        postselect(&joint, &self.ps)
    }

    /// Conditional outcome distributions per mode; `None` for degenerate modes.
    pub fn outcome_jets(&self, ensemble: &ModeEnsemble) -> Result<Vec<Option<OutcomeJet>>> {
        let povm = self.povm();
        ensemble
            .modes
            .iter()
            .map(|m| m.state.as_ref().map(|s| s.outcomes(&povm)).transpose())
            .collect()
    }

    /// Central-difference derivatives of the conditional outcome probabilities.
    pub fn finite_difference_outcomes(&self, sensor: &SensorModel, rel_step: f64) -> Result<Vec<Option<OutcomeJet>>> {
        let center = self.outcome_jets(&self.ensemble(sensor)?)?;
        let point = sensor.point();
        let probs_at = |p: [f64; 2]| -> Result<Vec<Option<Vec<f64>>>> {
            let jets = self.outcome_jets(&self.ensemble(&SensorModel::at(&p)?)?)?;
            Ok(jets.into_iter().map(|j| j.map(|j| j.probs)).collect())
        };
        let mut derivs: Vec<Vec<Option<Vec<f64>>>> = Vec::new();
        for a in 0..2 {
            let h = rel_step * point[a].abs().max(1.0);
            let (mut hi, mut lo) = (point, point);
            hi[a] += h;
            lo[a] -= h;
            // forward difference when the lower point leaves Γ >= 0
            let (lo, span) = if lo[a] < 0.0 && a == 1 { (point, h) } else { (lo, 2.0 * h) };
            let (phi, plo) = (probs_at(hi)?, probs_at(lo)?);
            derivs.push(
                phi.into_iter()
                    .zip(plo)
                    .map(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) => Some(x.iter().zip(&y).map(|(u, v)| (u - v) / span).collect()),
                        _ => None,
                    })
                    .collect(),
            );
        }
        Ok(center
            .into_iter()
            .enumerate()
            .map(|(m, c)| {
                let c = c?;
                let dprobs = derivs.iter().map(|d| d[m].clone()).collect::<Option<Vec<_>>>()?;
                Some(OutcomeJet { probs: c.probs, dprobs })
            })
            .collect())
    }

    /// Every (mode, outcome) pair reduced to an operator on the sensor.
    pub fn effective_povm(&self) -> Result<EffectivePovm> {
        let u = self.ma.initial_state()?;
        let phases = [self.ma.interaction_phases(sensor_sign(0)), self.ma.interaction_phases(sensor_sign(1))];
        let povm = self.povm();
        let mut modes = Vec::new();
        for (label, psi) in self.ps.postselectors() {
            let v: [Vec<Complex64>; 2] = [0, 1].map(|s| {
                u.iter()
                    .zip(&phases[s])
                    .map(|(x, ph)| psi[s].conj() * ph * x)
                    .collect::<Vec<_>>()
            });
            let outcomes = match &povm {
                Povm::Momentum => (0..u.len())
                    .map(|i| EffectiveOutcome {
                        a: 0.5 * (v[0][i].norm_sqr() + v[1][i].norm_sqr()),
                        b: v[1][i].conj() * v[0][i],
                    })
                    .collect(),
                Povm::Elements(elements) => elements
                    .iter()
                    .map(|e| {
                        let form = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
                            let n = x.len();
                            let mut acc = Complex64::new(0.0, 0.0);
                            for i in 0..n {
                                for j in 0..n {
                                    acc += x[i].conj() * e[(i, j)] * y[j];
                                }
                            }
                            acc
                        };
                        EffectiveOutcome {
                            a: 0.5 * (form(&v[0], &v[0]).re + form(&v[1], &v[1]).re),
                            b: form(&v[1], &v[0]),
                        }
                    })
                    .collect(),
            };
            modes.push(EffectiveMode { label, outcomes });
        }
        Ok(EffectivePovm { modes })
    }
}

/// Joint probability `p = a + Re(c b)` of one (mode, outcome) pair, where
/// `c = e^{-iφ-Γ²}` is the sensor coherence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveOutcome {
    pub a: f64,
    pub b: Complex64,
}

impl EffectiveOutcome {
    pub fn probability(&self, coherence: Complex64) -> f64 {
        self.a + (coherence * self.b).re
    }

    /// Probability and its `(phi, gamma_fluct)` gradient.
    pub fn probability_jet(&self, sensor: &SensorModel) -> (f64, [f64; 2]) {
        let c = sensor.coherence();
        let cb = c * self.b;
        let i = Complex64::new(0.0, 1.0);
        (self.a + cb.re, [(-i * cb).re, -2.0 * sensor.gamma_fluct * cb.re])
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveMode {
    pub label: ModeLabel,
    pub outcomes: Vec<EffectiveOutcome>,
}

/// The whole postselect-then-measure process as a POVM on the sensor.
#[derive(Clone, Debug)]
pub struct EffectivePovm {
    pub modes: Vec<EffectiveMode>,
}

impl EffectivePovm {
    pub fn n_outcomes(&self) -> usize {
        self.modes.iter().map(|m| m.outcomes.len()).sum()
    }

    /// Joint probabilities `w^△ P(k|△)`, mode-major.
    pub fn probabilities(&self, sensor: &SensorModel) -> Vec<f64> {
        let c = sensor.coherence();
        self.modes
            .iter()
            .flat_map(|m| m.outcomes.iter().map(move |o| o.probability(c)))
            .collect()
    }

    /// Index range of mode `m` in the mode-major flattening.
    pub fn mode_range(&self, m: usize) -> std::ops::Range<usize> {
        let start: usize = self.modes[..m].iter().map(|x| x.outcomes.len()).sum();
        start..start + self.modes[m].outcomes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn mismatched_readout_is_rejected() {
        let ma = MaModel::gaussian(1.0, 32).unwrap();
        let ps = PostselectionSpec::new(FRAC_PI_2).unwrap();
        assert!(Scheme::new(ma, ps, Measurement::Projective { theta_meas: 0.0 }).is_err());
        let ma = MaModel::qubit(1.0).unwrap();
        assert!(Scheme::new(ma, ps, Measurement::Momentum).is_err());
    }

    #[test]
    fn effective_povm_reproduces_mode_probabilities() {
        let schemes = [
            Scheme::qubit(1.1, 0.7, 0.4).unwrap(),
            Scheme::gaussian(0.7, 1.2, 128).unwrap(),
        ];
        let sensor = SensorModel::new(0.45, 0.35).unwrap();
        for scheme in &schemes {
            let eff = scheme.effective_povm().unwrap();
            let joint = eff.probabilities(&sensor);
            assert!((joint.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let ens = scheme.ensemble(&sensor).unwrap();
            let jets = scheme.outcome_jets(&ens).unwrap();
            for (m, (mode, jet)) in ens.modes.iter().zip(&jets).enumerate() {
                let jet = jet.as_ref().unwrap();
                for (k, idx) in eff.mode_range(m).enumerate() {
                    assert!((joint[idx] - mode.weight * jet.probs[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn analytic_and_difference_derivatives_agree() {
        let scheme = Scheme::qubit(0.9, 0.6, 1.3).unwrap();
        let sensor = SensorModel::new(0.3, 0.4).unwrap();
        let exact = scheme.outcome_jets(&scheme.ensemble(&sensor).unwrap()).unwrap();
        let fd = scheme.finite_difference_outcomes(&sensor, FD_STEP).unwrap();
        for (e, f) in exact.iter().zip(&fd) {
            let (e, f) = (e.as_ref().unwrap(), f.as_ref().unwrap());
            for a in 0..2 {
                for (x, y) in e.dprobs[a].iter().zip(&f.dprobs[a]) {
                    assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-3), "{x} vs {y}");
                }
            }
        }
    }
}
