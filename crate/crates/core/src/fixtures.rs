//! Small, fully deterministic initial-data builders used by tests, benches and
//! the command-line defaults.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{FieldKind, FlowState, ModeLattice, Problem, SpectralField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn vector(lat: ModeLattice, parts: &[f64]) -> Vec<Complex64> {
    (0..lat.dim()).map(|d| c(parts.get(d).copied().unwrap_or(0.0), 0.0)).collect()
}

/// `A cos(n k0 x2) e1`: amplitude `A/2 e1` on the modes `+-(0, n)`.
pub fn shear_mode(lat: ModeLattice, n: i64, amplitude: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(lat, FieldKind::Vector);
    let mut mode = vec![0i64; lat.dim()];
    mode[1] = n;
    f.set_mode_with_conjugate(&mode, &vector(lat, &[0.5 * amplitude]))?;
    Ok(f)
}

/// `A cos(n k0 x1)` as a scalar field.
pub fn cosine_scalar(lat: ModeLattice, n: i64, amplitude: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(lat, FieldKind::Scalar);
    let mut mode = vec![0i64; lat.dim()];
    mode[0] = n;
    f.set_mode_with_conjugate(&mode, &[c(0.5 * amplitude, 0.0)])?;
    Ok(f)
}

/// Two interacting velocity modes, `A [cos(x2) e1 + sin(x1 + x2) (e1 - e2)/sqrt 2]`
/// in units of the lattice base.
pub fn two_mode_velocity(lat: ModeLattice, amplitude: f64) -> Result<SpectralField> {
    let mut f = shear_mode(lat, 1, amplitude)?;
    let mut mode = vec![0i64; lat.dim()];
    mode[0] = 1;
    mode[1] = 1;
    let s = 0.5 * amplitude / std::f64::consts::SQRT_2;
    let mut amp = vec![c(0.0, 0.0); lat.dim()];
    // sin(theta) = (e^{i theta} - e^{-i theta}) / 2i
    amp[0] = c(0.0, -s);
    amp[1] = c(0.0, s);
    f.set_mode_with_conjugate(&mode, &amp)?;
    Ok(f)
}

/// Two-mode velocity with a one-mode temperature (Boussinesq) or magnetic
/// shear (MHD) companion, all of size `amplitude`.
pub fn two_mode_state(problem: Problem, lat: ModeLattice, amplitude: f64) -> Result<FlowState> {
    let u = two_mode_velocity(lat, amplitude)?;
    let companion = match problem {
        Problem::Boussinesq => cosine_scalar(lat, 1, amplitude)?,
        Problem::Mhd => {
            let mut b = SpectralField::zeros(lat, FieldKind::Vector);
            let mut mode = vec![0i64; lat.dim()];
            mode[0] = 1;
            b.set_mode_with_conjugate(&mode, &vector(lat, &[0.0, 0.5 * amplitude]))?;
            b
        }
    };
    FlowState::new(problem, u, companion)
}

/// A state whose companion is zero.
pub fn velocity_only(problem: Problem, u: SpectralField) -> Result<FlowState> {
    let lat = *u.lattice();
    FlowState::new(problem, u, SpectralField::zeros(lat, problem.companion_kind()))
}
