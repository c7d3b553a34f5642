use serde::Serialize;

use super::estimation::MleEstimate;
use crate::numerics::RealMatrix;
use crate::{Error, Result};

/// Replications required before a covariance is compared with the bound.
pub const MIN_REPLICATIONS: usize = 100;

/// Per-replication estimates and their sample covariance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateSet {
    pub points: Vec<[f64; 2]>,
    /// Mean, with the phase averaged on the circle.
    pub mean: [f64; 2],
    /// Unbiased sample covariance.
    pub covariance: RealMatrix,
}

impl EstimateSet {
    pub fn from_estimates(estimates: &[MleEstimate]) -> Result<Self> {
        let points = estimates
            .iter()
            .map(|e| {
                e.point()
                    .ok_or_else(|| Error::Unsupported("replication with an unidentifiable estimate".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<[f64; 2]>) -> Result<Self> {
        let r = points.len();
        if r < 2 {
            return Err(Error::TooFewReplications {
                got: r,
                min: 2,
                reason: "cannot form covariance",
            });
        }
        let (s, c) = points.iter().fold((0.0, 0.0), |(s, c), p| (s + p[0].sin(), c + p[0].cos()));
        let phi_mean = s.atan2(c);
        // phase deviations are taken on the circle around the mean
        let dev: Vec<[f64; 2]> = points
            .iter()
            .map(|p| [(p[0] - phi_mean + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI, p[1]])
            .collect();
        let m = [
            phi_mean + dev.iter().map(|d| d[0]).sum::<f64>() / r as f64,
            dev.iter().map(|d| d[1]).sum::<f64>() / r as f64,
        ];
        let centered: Vec<[f64; 2]> = dev.iter().map(|d| [d[0] - (m[0] - phi_mean), d[1] - m[1]]).collect();
        let covariance = RealMatrix::from_fn(2, |a, b| {
            centered.iter().map(|x| x[a] * x[b]).sum::<f64>() / (r - 1) as f64
        });
        Ok(Self {
            points,
            mean: m,
            covariance,
        })
    }

    pub fn replications(&self) -> usize {
        self.points.len()
    }
}

/// Scaled covariance against the Cramér-Rao bound `F^-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub shots: usize,
    pub replications: usize,
    /// `M Ĉ`.
    pub scaled_covariance: RealMatrix,
    pub fisher_inverse: RealMatrix,
    /// Smallest eigenvalue of `M Ĉ - F^-1`.
    pub min_eig_gap: f64,
    /// `|M Ĉ_aa - F^-1_aa| / F^-1_aa`.
    pub relative_diag_gaps: Vec<f64>,
    /// Spectral norm of `F^-1`.
    pub inverse_norm: f64,
    /// `3/√R ‖F^-1‖`, the allowed statistical negativity of the gap.
    pub statistical_tolerance: f64,
}

impl CovarianceReport {
    pub fn within_statistical_tolerance(&self) -> bool {
        self.min_eig_gap >= -self.statistical_tolerance
    }

    pub fn max_relative_diag_gap(&self) -> f64 {
        self.relative_diag_gaps.iter().copied().fold(0.0, f64::max)
    }
}

pub fn covariance_vs_bound(estimates: &EstimateSet, f: &RealMatrix, shots: usize) -> Result<CovarianceReport> {
    let r = estimates.replications();
    if r < MIN_REPLICATIONS {
        return Err(Error::TooFewReplications {
            got: r,
            min: MIN_REPLICATIONS,
            reason: "covariance too noisy to compare with the bound",
        });
    }
    let fisher_inverse = f.inverse()?;
    let scaled_covariance = estimates.covariance.scale(shots as f64);
    let min_eig_gap = scaled_covariance.sub(&fisher_inverse)?.min_eig()?;
    let relative_diag_gaps = (0..2)
        .map(|a| (scaled_covariance[(a, a)] - fisher_inverse[(a, a)]).abs() / fisher_inverse[(a, a)])
        .collect();
    let inverse_norm = fisher_inverse.spectral_norm()?;
    Ok(CovarianceReport {
        shots,
        replications: r,
        scaled_covariance,
        fisher_inverse,
        min_eig_gap,
        relative_diag_gaps,
        inverse_norm,
        statistical_tolerance: 3.0 / (r as f64).sqrt() * inverse_norm,
    })
}
