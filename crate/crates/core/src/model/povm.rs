use num_complex::Complex64;

use super::postselection::ModeState;
use crate::numerics::{psd_min_eig, ComplexMatrix, DENSITY_TOL};
use crate::{Error, Result};

/// Probabilities down to this negativity are clipped to zero.
pub const CLIP_TOL: f64 = 1e-12;
/// Allowed deviation of a distribution's total from one.
pub const SUM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum Povm {
    /// Explicit PSD elements summing to the identity.
    Elements(Vec<ComplexMatrix>),
    /// Momentum measurement on the apparatus grid, `{w_i |p_i⟩⟨p_i|}`.
    Momentum,
}

impl Povm {
    pub fn elements(elements: Vec<ComplexMatrix>) -> Result<Self> {
        validate_elements(&elements)?;
        Ok(Self::Elements(elements))
    }

    /// Projective qubit measurement on `cos(θ'/2)|0⟩ + sin(θ'/2)|1⟩` and its complement.
    pub fn qubit_projective(theta_meas: f64) -> Self {
        let (s, c) = (theta_meas / 2.0).sin_cos();
        let v = [Complex64::new(c, 0.0), Complex64::new(s, 0.0)];
        let w = [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)];
        Self::Elements(vec![
            ComplexMatrix::outer(&v, &v).expect("equal lengths"),
            ComplexMatrix::outer(&w, &w).expect("equal lengths"),
        ])
    }

    pub fn n_outcomes(&self, dim: usize) -> usize {
        match self {
            Self::Elements(e) => e.len(),
            Self::Momentum => dim,
        }
    }
}

fn validate_elements(elements: &[ComplexMatrix]) -> Result<()> {
    let first = elements
        .first()
        .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
    let n = first.dim();
    let mut total = ComplexMatrix::zeros(n);
    for (k, e) in elements.iter().enumerate() {
        if e.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: e.dim() });
        }
        let min = psd_min_eig(e)?;
        if min < -DENSITY_TOL {
            return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:e}")));
        }
        total = &total + e;
    }
    let defect = total.max_abs_diff(&ComplexMatrix::identity(n))?;
    if defect > DENSITY_TOL {
        return Err(Error::InvalidPovm(format!("elements sum to identity only within {defect:e}")));
    }
    Ok(())
}

fn clip(p: f64) -> Result<f64> {
    if p < -CLIP_TOL {
        return Err(Error::NegativeProbability(p));
    }
    Ok(p.max(0.0))
}

fn check_sum(probs: &[f64]) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidPovm(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// `P(k) = Tr[ρ Π_k]`, clipped at zero.
pub fn outcome_distribution(rho: &ComplexMatrix, povm: &[ComplexMatrix]) -> Result<Vec<f64>> {
    validate_elements(povm)?;
    let probs = povm
        .iter()
        .map(|e| clip(rho.trace_product(e)?.re))
        .collect::<Result<Vec<_>>>()?;
    check_sum(&probs)?;
    Ok(probs)
}

/// Outcome probabilities of a conditional state and their parameter derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeJet {
    pub probs: Vec<f64>,
    /// `dprobs[a][k] = ∂_a P(k)`.
    pub dprobs: Vec<Vec<f64>>,
}

impl ModeState {
    pub fn outcomes(&self, povm: &Povm) -> Result<OutcomeJet> {
        let (probs, dprobs) = match (self, povm) {
            (Self::LowRank(l), Povm::Momentum) => l.momentum_distribution(),
            (Self::LowRank(_), Povm::Elements(_)) => {
                return Err(Error::Unsupported(
                    "explicit POVM elements on a low-rank grid state; use the dense form".into(),
                ))
            }
            (Self::Dense(j), Povm::Momentum) => {
                let n = j.dim();
                (
                    (0..n).map(|i| j.rho[(i, i)].re).collect(),
                    j.drho.iter().map(|d| (0..n).map(|i| d[(i, i)].re).collect()).collect(),
                )
            }
            (Self::Dense(j), Povm::Elements(e)) => {
                if e.first().map(|m| m.dim()) != Some(j.dim()) {
                    return Err(Error::DimensionMismatch {
                        expected: j.dim(),
                        got: e.first().map_or(0, |m| m.dim()),
                    });
                }
                let p = e
                    .iter()
                    .map(|m| Ok(j.rho.trace_product(m)?.re))
                    .collect::<Result<Vec<_>>>()?;
                let dp = j
                    .drho
                    .iter()
                    .map(|d| e.iter().map(|m| Ok(d.trace_product(m)?.re)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                (p, dp)
            }
        };
        let probs = probs.into_iter().map(clip).collect::<Result<Vec<_>>>()?;
        check_sum(&probs)?;
        Ok(OutcomeJet { probs, dprobs })
    }
}
