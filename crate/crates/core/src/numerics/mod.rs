//! Dense linear algebra and quadrature used by the rest of the crate.

mod eigen;
mod matrix;
mod quadrature;
mod real;

pub use eigen::{eig_hermitian, psd_min_eig, HermitianEigen};
pub use matrix::{ComplexMatrix, DENSITY_TOL, HERMITIAN_TOL};
pub use quadrature::{grid_inner, QuadratureGrid, DEFAULT_GRID_POINTS};
pub use real::{invert_sym_2x2, RealMatrix, SINGULAR_DET};
