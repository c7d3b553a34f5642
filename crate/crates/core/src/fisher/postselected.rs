use num_complex::Complex64;
use serde::Serialize;

use super::sld::SldSet;
use crate::model::{ModeEnsemble, ModeLabel, Povm};
use crate::numerics::RealMatrix;
use crate::{Error, Result};

/// Outcomes with probability below this are treated as impossible.
const ZERO_PROBABILITY: f64 = 1e-14;
/// Largest derivative tolerated on an impossible outcome.
const ZERO_PROBABILITY_SLOPE: f64 = 1e-8;

/// Quantum contribution of one postselection mode.
#[derive(Clone, Debug, Serialize)]
pub struct ModeInfo {
    pub label: ModeLabel,
    pub weight: f64,
    /// Weighted contribution `w^△ Q^△`.
    pub qfim: RealMatrix,
    /// `Tr[ρ^△ [L_0, L_1]]`; zero for one-parameter families.
    pub commutator_trace: Complex64,
    /// Largest SLD equation residual over the retained support.
    pub sld_residual: f64,
}

/// pQFIM `Q = Σ_△ w^△ Q^△` and the per-mode pieces.
pub fn pqfim(ensemble: &ModeEnsemble) -> Result<(RealMatrix, Vec<ModeInfo>)> {
    let d = ensemble.n_params();
    let mut total = RealMatrix::zeros(d);
    let mut modes = Vec::with_capacity(ensemble.modes.len());
    for mode in &ensemble.modes {
        let Some(state) = &mode.state else {
            log::info!("degenerate mode {} contributes no quantum information", mode.label);
            modes.push(ModeInfo {
                label: mode.label,
                weight: mode.weight,
                qfim: RealMatrix::zeros(d),
                commutator_trace: Complex64::new(0.0, 0.0),
                sld_residual: 0.0,
            });
            continue;
        };
        let jet = state.fisher_jet()?;
        let set = SldSet::from_jet(&jet)?;
        let q = set.qfim().scale(mode.weight);
        total = total.add(&q)?;
        let commutator_trace = if d >= 2 {
            set.commutator_trace(0, 1)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let sld_residual = (0..set.len()).map(|a| set.residual(a)).fold(0.0, f64::max);
        modes.push(ModeInfo {
            label: mode.label,
            weight: mode.weight,
            qfim: q,
            commutator_trace,
            sld_residual,
        });
    }
    Ok((total, modes))
}

/// Classical Fisher information of a postselected readout.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalInfo {
    /// pCFIM `F = Σ_△ w^△ Σ_k ∂P ∂Pᵀ / P` with conditional probabilities `P`.
    pub f: RealMatrix,
    /// Weighted per-mode contributions, in ensemble order.
    pub modes: Vec<(ModeLabel, RealMatrix)>,
    /// Information carried by the mode weights themselves,
    /// `Σ_△ ∂w ∂wᵀ / w` plus the cross terms `Σ_△ Σ_k (∂w ∂Pᵀ + ∂P ∂wᵀ)`.
    pub weight_information: RealMatrix,
}

impl ClassicalInfo {
    /// Fisher information of the complete record (mode and outcome).
    pub fn total(&self) -> Result<RealMatrix> {
        self.f.add(&self.weight_information)
    }
}

/// pCFIM of `povm` applied in every non-degenerate mode.
pub fn pcfim(ensemble: &ModeEnsemble, povm: &Povm) -> Result<ClassicalInfo> {
    let d = ensemble.n_params();
    let mut f = RealMatrix::zeros(d);
    let mut weight_information = RealMatrix::zeros(d);
    let mut modes = Vec::with_capacity(ensemble.modes.len());
    for mode in &ensemble.modes {
        let Some(state) = &mode.state else {
            modes.push((mode.label, RealMatrix::zeros(d)));
            continue;
        };
        let jet = state.outcomes(povm)?;
        let mut fm = RealMatrix::zeros(d);
        let mut dsum = vec![0.0; d];
        for (k, &p) in jet.probs.iter().enumerate() {
            let grad: Vec<f64> = (0..d).map(|a| jet.dprobs[a][k]).collect();
            for a in 0..d {
                dsum[a] += grad[a];
            }
            if p < ZERO_PROBABILITY {
                let slope = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
                if slope > ZERO_PROBABILITY_SLOPE {
                    return Err(Error::SingularOutcome {
                        mode: mode.label.to_string(),
                        outcome: k,
                        derivative: slope,
                    });
                }
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    fm[(a, b)] += grad[a] * grad[b] / p;
                }
            }
        }
        let fm = fm.scale(mode.weight);
        f = f.add(&fm)?;
        let dw = &mode.dweight;
        let wi = RealMatrix::from_fn(d, |a, b| dw[a] * dw[b] / mode.weight + dw[a] * dsum[b] + dsum[a] * dw[b]);
        weight_information = weight_information.add(&wi)?;
        modes.push((mode.label, fm));
    }
    Ok(ClassicalInfo {
        f,
        modes,
        weight_information,
    })
}
