//! Lattice fields, the Hodge projection, truncated convolution and the
//! shared Galerkin model.

mod field;
mod lattice;
mod model;

pub use field::{convolve, hodge_project, FieldKind, FlowState, Problem, SpectralField};
pub use lattice::{ModeLattice, PhysicalParams};
pub use model::{first_coeff_boussinesq, first_coeff_mhd, Model, DIVERGENCE_TOL};
