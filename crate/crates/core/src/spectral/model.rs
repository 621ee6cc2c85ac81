use num_complex::Complex64;

use super::field::{advect_sums, FieldKind, FlowState, Problem, SpectralField};
use super::lattice::{ModeLattice, PhysicalParams};
use crate::error::{Error, Result};

const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// Tolerance on |k.a|/(|k||a|) accepted for "divergence-free" input data.
pub const DIVERGENCE_TOL: f64 = 1e-12;

/// The truncated Fourier-Galerkin system shared by every solver in the crate.
///
/// Both problems have the form `Y' = L Y + N(Y, Y) + F` where `L` is diagonal
/// diffusion plus (Boussinesq only) buoyancy, and `N` is the bilinear
/// transport term.
#[derive(Debug, Clone)]
pub struct Model {
    problem: Problem,
    params: PhysicalParams,
    lattice: ModeLattice,
}

impl Model {
    pub fn new(problem: Problem, params: PhysicalParams, lattice: ModeLattice) -> Result<Self> {
        params.validate()?;
        if params.dim != lattice.dim() {
            return Err(Error::InvalidParameter(format!(
                "params.dim = {} but lattice dim = {}",
                params.dim,
                lattice.dim()
            )));
        }
        Ok(Self { problem, params, lattice })
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    /// Diffusivities of the primary and companion equations.
    pub fn diffusivities(&self) -> [f64; 2] {
        match self.problem {
            Problem::Boussinesq => [self.params.nu, self.params.mu_thermal],
            Problem::Mhd => [self.params.nu, self.params.magnetic_diffusivity()],
        }
    }

    pub fn zero_state(&self) -> FlowState {
        FlowState::zeros(self.problem, self.lattice)
    }

    pub fn check_state(&self, y: &FlowState) -> Result<()> {
        if y.problem() != self.problem {
            return Err(Error::KindMismatch(format!(
                "expected a {:?} state, got {:?}",
                self.problem,
                y.problem()
            )));
        }
        if *y.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }

    /// Validates initial data: right problem and lattice, real fields, solenoidal vectors.
    pub fn check_data(&self, y: &FlowState) -> Result<()> {
        self.check_state(y)?;
        for f in y.fields() {
            let scale = f.max_abs().max(f64::MIN_POSITIVE);
            let defect = f.conjugate_symmetry_defect();
            if defect > 1e-12 * scale {
                return Err(Error::NotConjugateSymmetric { defect });
            }
            if f.kind() == FieldKind::Vector {
                f.check_divergence_free(DIVERGENCE_TOL)?;
            }
        }
        Ok(())
    }

    pub fn check_forcing(&self, f: &SpectralField) -> Result<()> {
        if *f.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        if f.kind() != FieldKind::Vector {
            return Err(Error::KindMismatch("forcing must be a vector field".into()));
        }
        f.check_divergence_free(DIVERGENCE_TOL)?;
        let defect = f.conjugate_symmetry_defect();
        if defect > 1e-12 * f.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotConjugateSymmetric { defect });
        }
        Ok(())
    }

    /// Bilinear transport term `N(A, B)`.
    ///
    /// Boussinesq: `(-i P_k k_j [a1_j * b1], -i k_j [a1_j * b2])`.
    /// MHD: `(-i P_k k_j [a1_j * b1 - c a2_j * b2], -i P_k k_j [a1_j * b2 - a2_j * b1])`
    /// with `c = 1/(mu rho)`.
    pub fn nonlinear(&self, a: &FlowState, b: &FlowState) -> FlowState {
        let (mut p, mut s) = match self.problem {
            Problem::Boussinesq => {
                let mut sums = advect_sums(a.primary(), &[b.primary(), b.companion()]);
                let s = sums.pop().expect("two sums");
                let p = sums.pop().expect("two sums");
                (p, s)
            }
            Problem::Mhd => {
                let c = self.params.lorentz_coupling();
                let [mut p, mut s]: [SpectralField; 2] =
                    advect_sums(a.primary(), &[b.primary(), b.companion()])
                        .try_into()
                        .expect("two sums");
                let [bb, bv]: [SpectralField; 2] =
                    advect_sums(a.companion(), &[b.companion(), b.primary()])
                        .try_into()
                        .expect("two sums");
                p.axpy_real(-c, &bb);
                s.axpy_real(-1.0, &bv);
                (p, s)
            }
        };
        p.scale(MINUS_I);
        p.project();
        s.scale(MINUS_I);
        if self.problem == Problem::Mhd {
            s.project();
        }
        FlowState::new(self.problem, p, s).expect("consistent kinds")
    }

    /// Buoyancy coupling `(a P_k[e2 S], 0)`; zero for MHD.
    pub fn coupling(&self, y: &FlowState) -> FlowState {
        let mut out = self.zero_state();
        if self.problem == Problem::Mhd || self.params.buoyancy_a == 0.0 {
            return out;
        }
        let a = self.params.buoyancy_a;
        let lat = self.lattice;
        let dim = lat.dim();
        let prim = out.primary_mut();
        for idx in 0..lat.len() {
            if idx == lat.zero_index() {
                continue;
            }
            let s = y.companion().amplitude(idx)[0];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            let amp = prim.amplitude_mut(idx);
            amp[1] = s * a;
            let k = lat.wavevector(idx);
            let ksq = lat.k_squared(idx);
            let dot: Complex64 = (0..dim).map(|d| amp[d] * k[d]).sum();
            for d in 0..dim {
                amp[d] -= dot * (k[d] / ksq);
            }
        }
        out
    }

    /// `L Y`: diffusion on both fields plus the coupling.
    pub fn linear(&self, y: &FlowState) -> FlowState {
        let mut out = self.coupling(y);
        let diff = self.diffusivities();
        let lat = self.lattice;
        for (field, (src, d)) in out.fields_mut().into_iter().zip(y.fields().into_iter().zip(diff)) {
            let nc = field.ncomp();
            let dst = field.data_mut();
            for idx in 0..lat.len() {
                let rate = -d * lat.k_squared(idx);
                for c in 0..nc {
                    dst[idx * nc + c] += src.data()[idx * nc + c] * rate;
                }
            }
        }
        out
    }

    /// Full right-hand side `L Y + N(Y, Y) + (f, 0)`.
    pub fn rhs(&self, y: &FlowState, forcing: &SpectralField) -> FlowState {
        let mut out = self.linear(y);
        out.axpy_unchecked(1.0, &self.nonlinear(y, y));
        out.primary_mut().axpy_real(1.0, forcing);
        out
    }
}

fn first_coeff(
    problem: Problem,
    state: &FlowState,
    forcing: &SpectralField,
    params: &PhysicalParams,
) -> Result<(SpectralField, SpectralField)> {
    if state.problem() != problem {
        return Err(Error::KindMismatch(format!("expected a {problem:?} state")));
    }
    let model = Model::new(problem, *params, *state.lattice())?;
    model.check_data(state)?;
    model.check_forcing(forcing)?;
    Ok(model.rhs(state, forcing).into_parts())
}

/// `(u1, Theta1)`: the right-hand side of the Boussinesq system at t = 0.
pub fn first_coeff_boussinesq(
    state: &FlowState,
    forcing: &SpectralField,
    params: &PhysicalParams,
) -> Result<(SpectralField, SpectralField)> {
    first_coeff(Problem::Boussinesq, state, forcing, params)
}

/// `(v1, B1)`: the right-hand side of the MHD system at t = 0.
pub fn first_coeff_mhd(
    state: &FlowState,
    forcing: &SpectralField,
    params: &PhysicalParams,
) -> Result<(SpectralField, SpectralField)> {
    first_coeff(Problem::Mhd, state, forcing, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::testing::{random_scalar, random_solenoidal};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_data_gives_zero() {
        let lat = ModeLattice::new(1.0, 2, 2).unwrap();
        let p = PhysicalParams { buoyancy_a: 2.0, ..Default::default() };
        let zero = FlowState::zeros(Problem::Boussinesq, lat);
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        let (u1, t1) = first_coeff_boussinesq(&zero, &f, &p).unwrap();
        assert!(u1.is_zero() && t1.is_zero());
        let zero = FlowState::zeros(Problem::Mhd, lat);
        let (v1, b1) = first_coeff_mhd(&zero, &f, &p).unwrap();
        assert!(v1.is_zero() && b1.is_zero());
    }

    #[test]
    fn shear_mode_reduces_to_heat() {
        let lat = ModeLattice::new(2.0, 3, 2).unwrap();
        let p = PhysicalParams { nu: 0.3, buoyancy_a: 1.5, ..Default::default() };
        let u0 = fixtures::shear_mode(lat, 1, 0.8).unwrap();
        let state = FlowState::new(Problem::Boussinesq, u0.clone(), SpectralField::zeros(lat, FieldKind::Scalar)).unwrap();
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        let (u1, t1) = first_coeff_boussinesq(&state, &f, &p).unwrap();
        // |k|^2 = 4 on the shear modes
        assert!(u1.max_abs_diff(&u0.scaled(c(-0.3 * 4.0, 0.0))).unwrap() < 1e-15);
        assert!(t1.is_zero());

        let mhd = FlowState::new(Problem::Mhd, u0.clone(), SpectralField::zeros(lat, FieldKind::Vector)).unwrap();
        let (v1, b1) = first_coeff_mhd(&mhd, &f, &p).unwrap();
        assert!(v1.max_abs_diff(&u0.scaled(c(-1.2, 0.0))).unwrap() < 1e-15);
        assert!(b1.is_zero());
    }

    #[test]
    fn magnetic_shear_decays_with_magnetic_diffusivity() {
        let lat = ModeLattice::new(1.0, 3, 2).unwrap();
        let p = PhysicalParams { mu_mag: 0.5, sigma: 4.0, rho: 0.3, ..Default::default() };
        let b0 = fixtures::shear_mode(lat, 2, 1.1).unwrap();
        let state = FlowState::new(Problem::Mhd, SpectralField::zeros(lat, FieldKind::Vector), b0.clone()).unwrap();
        let (v1, b1) = first_coeff_mhd(&state, &SpectralField::zeros(lat, FieldKind::Vector), &p).unwrap();
        assert!(v1.max_abs() < 1e-15);
        // 1/(mu sigma) = 0.5, |k|^2 = 4
        assert!(b1.max_abs_diff(&b0.scaled(c(-2.0, 0.0))).unwrap() < 1e-15);
    }

    #[test]
    fn single_temperature_mode() {
        let lat = ModeLattice::new(1.0, 2, 2).unwrap();
        let p = PhysicalParams { mu_thermal: 0.7, buoyancy_a: 3.0, ..Default::default() };
        let mut theta = SpectralField::zeros(lat, FieldKind::Scalar);
        theta.set_mode_with_conjugate(&[1, 1], &[c(0.5, -0.25)]).unwrap();
        let state = FlowState::new(Problem::Boussinesq, SpectralField::zeros(lat, FieldKind::Vector), theta.clone()).unwrap();
        let (u1, t1) = first_coeff_boussinesq(&state, &SpectralField::zeros(lat, FieldKind::Vector), &p).unwrap();
        let idx = lat.index_of(&[1, 1]).unwrap();
        // a P_k [e2 Theta] with k = (1, 1): P_k e2 = (-1/2, 1/2)
        let want = [c(0.5, -0.25) * -1.5, c(0.5, -0.25) * 1.5];
        assert!((u1.amplitude(idx)[0] - want[0]).norm() < 1e-15);
        assert!((u1.amplitude(idx)[1] - want[1]).norm() < 1e-15);
        assert!(t1.max_abs_diff(&theta.scaled(c(-0.7 * 2.0, 0.0))).unwrap() < 1e-15);
    }

    #[test]
    fn outputs_are_solenoidal_and_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            let lat = ModeLattice::new(1.0, 2, dim).unwrap();
            let p = PhysicalParams { buoyancy_a: 0.9, dim, ..Default::default() };
            let f = random_solenoidal(&mut rng, lat, 0.3);
            for problem in [Problem::Boussinesq, Problem::Mhd] {
                let comp = match problem {
                    Problem::Boussinesq => random_scalar(&mut rng, lat, 1.0),
                    Problem::Mhd => random_solenoidal(&mut rng, lat, 1.0),
                };
                let state = FlowState::new(problem, random_solenoidal(&mut rng, lat, 1.0), comp).unwrap();
                let (a, b) = first_coeff(problem, &state, &f, &p).unwrap();
                for g in [&a, &b] {
                    assert!(g.divergence_defect().0 <= 1e-12);
                    assert!(g.conjugate_symmetry_defect() <= 1e-14 * g.max_abs());
                }
            }
        }
    }

    #[test]
    fn rejects_compressible_input() {
        let lat = ModeLattice::new(1.0, 2, 2).unwrap();
        let mut u = SpectralField::zeros(lat, FieldKind::Vector);
        u.set_mode_with_conjugate(&[1, 0], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let state = FlowState::new(Problem::Boussinesq, u, SpectralField::zeros(lat, FieldKind::Scalar)).unwrap();
        let err = first_coeff_boussinesq(&state, &SpectralField::zeros(lat, FieldKind::Vector), &PhysicalParams::default());
        assert!(matches!(err, Err(Error::NotDivergenceFree { .. })));
    }

    #[test]
    fn nonlinear_term_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lat = ModeLattice::new(1.0, 2, 2).unwrap();
        let p = PhysicalParams::default();
        let model = Model::new(Problem::Mhd, p, lat).unwrap();
        let a = FlowState::new(Problem::Mhd, random_solenoidal(&mut rng, lat, 1.0), random_solenoidal(&mut rng, lat, 1.0)).unwrap();
        let b = FlowState::new(Problem::Mhd, random_solenoidal(&mut rng, lat, 1.0), random_solenoidal(&mut rng, lat, 1.0)).unwrap();
        let mut ab = a.clone();
        ab.axpy(2.0, &b).unwrap();
        let lhs = model.nonlinear(&ab, &b);
        let mut rhs = model.nonlinear(&a, &b);
        rhs.axpy(2.0, &model.nonlinear(&b, &b)).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn nonlinear_term_keeps_real_solenoidal_states(seed in 0u64..1000, mhd in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lat = ModeLattice::new(1.0, 3, 2).unwrap();
            let problem = if mhd { Problem::Mhd } else { Problem::Boussinesq };
            let model = Model::new(problem, PhysicalParams { buoyancy_a: 0.7, ..Default::default() }, lat).unwrap();
            let mut state = || {
                let u = random_solenoidal(&mut rng, lat, 1.0);
                let c = match problem {
                    Problem::Boussinesq => random_scalar(&mut rng, lat, 1.0),
                    Problem::Mhd => random_solenoidal(&mut rng, lat, 1.0),
                };
                FlowState::new(problem, u, c).unwrap()
            };
            let (a, b) = (state(), state());
            let n = model.nonlinear(&a, &b);
            let scale = n.max_abs().max(1.0);
            prop_assert!(n.conjugate_symmetry_defect() <= 1e-13 * scale);
            prop_assert!(n.divergence_defect() <= 1e-12);
        }
    }
}
