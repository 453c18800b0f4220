//! Parameters, grids, fields and the weighted sup norms.

mod conjugation;
mod field;
mod grid;
mod norms;
mod params;
mod stencil;

pub use conjugation::{gradient_relation_check, phi_to_psi, psi_to_phi, shift_weight};
pub use field::Field;
pub use grid::{Axis, Grid, Point};
pub use norms::{norm, norm_in, NormKind, WeightedNormReport};
pub use params::{Parameters, DEFAULT_SIGMA};
pub use stencil::{AnalyticDerivatives, DerivativeOracle, FiniteDifference};

pub(crate) use stencil::{gradient as stencil_gradient, laplacian as stencil_laplacian, magnitude};
