//! Spectral Borel-plane solver for the Boussinesq and magnetic Benard (MHD)
//! equations on finite Fourier lattices.
//!
//! The solution of `Y' = L Y + N(Y, Y) + F` is written as
//! `Y(t) = Y0 + int_0^inf Y_B(p) e^{-p/t} dp`; the Borel-plane function `Y_B` is
//! computed by a Taylor recursion near `p = 0` and by a Volterra march beyond,
//! then transformed back and checked against a Runge-Kutta integration of the
//! same truncated system. The crate also evaluates the a-priori and improved
//! existence-time bounds built from the same quantities.

// `!(x > 0.0)` is the idiom for rejecting NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod error;
pub mod estimates;
pub mod fixtures;
pub mod march;
pub mod norms;
pub mod reconstruct;
pub mod spectral;
pub mod taylor;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{
    convolve, first_coeff_boussinesq, first_coeff_mhd, hodge_project, FieldKind, FlowState,
    ModeLattice, Model, PhysicalParams, Problem, SpectralField,
};
