use serde::Serialize;

use super::postselected::{ClassicalInfo, ModeInfo};
use crate::numerics::RealMatrix;

/// Everything computed for one scheme at one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct FisherReport {
    pub params: Vec<&'static str>,
    /// Sensor QFIM.
    pub h: RealMatrix,
    /// Postselected QFIM.
    pub q: RealMatrix,
    /// Postselected classical Fisher matrix.
    pub f: RealMatrix,
    pub quantum_modes: Vec<ModeInfo>,
    pub classical: ClassicalInfo,
    /// `Tr[F H^-1]`.
    pub tradeoff_classical: f64,
    /// `Tr[Q H^-1]`.
    pub tradeoff_quantum: f64,
}

impl FisherReport {
    pub fn success_weight(&self) -> f64 {
        self.quantum_modes.first().map_or(0.0, |m| m.weight)
    }
}
