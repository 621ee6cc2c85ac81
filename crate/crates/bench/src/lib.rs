//! Fixture builders shared by the benchmarks.

use borel_flow::fixtures::two_mode_state;
use borel_flow::{FieldKind, FlowState, ModeLattice, Model, PhysicalParams, Problem, SpectralField};

/// Two-mode Boussinesq data on a `(2 cutoff + 1)^2` lattice, with its model and zero forcing.
pub fn two_mode(cutoff: usize, amplitude: f64) -> (Model, FlowState, SpectralField) {
    let lat = ModeLattice::new(1.0, cutoff, 2).expect("valid lattice");
    let params = PhysicalParams { nu: 0.5, mu_thermal: 0.7, buoyancy_a: 0.6, ..Default::default() };
    let model = Model::new(Problem::Boussinesq, params, lat).expect("valid model");
    let y0 = two_mode_state(Problem::Boussinesq, lat, amplitude).expect("fixture fits the lattice");
    (model, y0, SpectralField::zeros(lat, FieldKind::Vector))
}
