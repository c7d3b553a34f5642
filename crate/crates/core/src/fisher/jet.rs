use crate::numerics::{ComplexMatrix, DENSITY_TOL};
use crate::{Error, Result};

/// Tolerance on Hermiticity and tracelessness of state derivatives.
pub const DERIVATIVE_TOL: f64 = 1e-9;

/// A density matrix together with its first derivatives, one per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct StateJet {
    pub rho: ComplexMatrix,
    pub drho: Vec<ComplexMatrix>,
}

impl StateJet {
    pub fn new(rho: ComplexMatrix, drho: Vec<ComplexMatrix>) -> Result<Self> {
        for d in &drho {
            if d.dim() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rho.dim(),
                    got: d.dim(),
                });
            }
        }
        Ok(Self { rho, drho })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn n_params(&self) -> usize {
        self.drho.len()
    }

    /// Checks that `rho` is a density matrix and every derivative is
    /// Hermitian and traceless.
    pub fn validate(&self) -> Result<()> {
        self.rho.check_density()?;
        for d in &self.drho {
            let scale = d.max_abs().max(1.0);
            let asymmetry = d.hermiticity_defect();
            if asymmetry > DERIVATIVE_TOL * scale {
                return Err(Error::NotHermitian {
                    asymmetry,
                    tolerance: DERIVATIVE_TOL * scale,
                });
            }
            let tr = d.trace();
            if tr.norm() > DERIVATIVE_TOL * scale + DENSITY_TOL {
                return Err(Error::NotDensity(format!("derivative has trace {tr}")));
            }
        }
        Ok(())
    }
}

/// A parameterized family of density matrices.
pub trait ParamFamily {
    fn param_names(&self) -> &[&'static str];

    /// State and derivatives at `point`, which has one entry per parameter.
    fn eval(&self, point: &[f64]) -> Result<StateJet>;
}
