//! Postselected multi-parameter quantum estimation.
//!
//! A two-level sensor picks up a phase `phi` and a phase fluctuation
//! `gamma_fluct`, couples to a measurement apparatus (qubit or Gaussian
//! pointer), and is then postselected. This crate computes the sensor QFIM
//! `H`, the postselected QFIM `Q` and the postselected classical Fisher
//! matrix `F`, checks the chain `F <= Q <= H`, evaluates the tradeoff traces
//! `Tr[F H^-1]` and `Tr[Q H^-1]`, and runs Monte-Carlo maximum-likelihood
//! experiments against the classical Cramér-Rao bound.
//!
//! Modules, bottom-up:
//!
//! - [`numerics`]: dense complex matrices, Jacobi eigensolver, quadrature grids.
//! - [`model`]: sensor channel, apparatus models, interaction and postselection.
//! - [`fisher`]: SLDs, QFIM, pQFIM, pCFIM and commutator traces.
//! - [`closed_form`]: analytic results for both apparatus models.
//! - [`analysis`]: bound-chain verdicts, tradeoffs, sampling, MLE, covariance.

pub mod analysis;
pub mod closed_form;
mod error;
pub mod fisher;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
