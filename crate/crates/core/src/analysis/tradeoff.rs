use serde::Serialize;

use crate::numerics::RealMatrix;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tradeoffs {
    /// `Tr[F H^-1]`.
    pub classical: f64,
    /// `Tr[Q H^-1]`.
    pub quantum: f64,
    /// `F_aa / H_aa` per parameter.
    pub classical_ratios: Vec<f64>,
    /// `Q_aa / H_aa` per parameter.
    pub quantum_ratios: Vec<f64>,
}

/// Tradeoff traces against the sensor QFIM; fails if `H` is singular.
pub fn tradeoffs(f: &RealMatrix, q: &RealMatrix, h: &RealMatrix) -> Result<Tradeoffs> {
    let h_inv = h.inverse()?;
    let classical = f.matmul(&h_inv)?.trace();
    let quantum = q.matmul(&h_inv)?.trace();
    let ratios = |m: &RealMatrix| (0..m.dim()).map(|a| m[(a, a)] / h[(a, a)]).collect();
    Ok(Tradeoffs {
        classical,
        quantum,
        classical_ratios: ratios(f),
        quantum_ratios: ratios(q),
    })
}
