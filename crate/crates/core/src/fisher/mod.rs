//! Fisher information for parameterized states and postselected ensembles.

mod jet;
mod postselected;
mod report;
mod sld;

pub use jet::{ParamFamily, StateJet, DERIVATIVE_TOL};
pub use postselected::{pcfim, pqfim, ClassicalInfo, ModeInfo};
pub use report::FisherReport;
pub use sld::{
    commutator_trace, default_support_eps, qfim_of_jet, sld, slds, SldSet, EXPLICIT_PRODUCT_MAX_DIM, SUPPORT_REL,
};

use crate::numerics::RealMatrix;
use crate::Result;

/// QFIM of `family` at `point`.
pub fn qfim<F: ParamFamily + ?Sized>(family: &F, point: &[f64]) -> Result<RealMatrix> {
    let jet = family.eval(point)?;
    qfim_of_jet(&jet)
}
