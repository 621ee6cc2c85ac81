//! Volterra march for the Borel-plane integral equation
//!
//! `Y(p) = Phi(p) Y1 + int_0^p H(p, p') R(p') dp'`,
//! `R(p) = C Y(p) + N(U0, Y(p)) + N(Y(p), U0) + int_0^p N(Y(s), Y(p - s)) ds`,
//!
//! where `Phi = 2 J1(z)/z` and `H` are the per-mode heat kernels of each field
//! and `C` is the buoyancy coupling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::KernelRow;
use crate::error::{Error, Result};
use crate::spectral::{FlowState, Model, PhysicalParams, Problem, SpectralField};
use crate::taylor::{borel_series, eval_series, radius_estimate};
use crate::norms::NormParams;

/// Nodes `p_i = p_max (i/n)^grading`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelGrid {
    nodes: Vec<f64>,
    grading: f64,
    p_max: f64,
}

pub fn build_grid(p_max: f64, n: usize, grading: f64) -> Result<BorelGrid> {
    if !(p_max > 0.0 && p_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("p_max must be positive, got {p_max}")));
    }
    if n == 0 {
        return Err(Error::InvalidGrid("grid needs at least one interval".into()));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::InvalidGrid(format!("grading must be >= 1, got {grading}")));
    }
    let nodes = (0..=n).map(|i| p_max * (i as f64 / n as f64).powf(grading)).collect();
    Ok(BorelGrid { nodes, grading, p_max })
}

impl BorelGrid {
    /// Arbitrary strictly increasing nodes starting at 0.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("nodes must start at 0 and have at least two entries".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing and finite".into()));
        }
        let p_max = *nodes.last().expect("nonempty");
        Ok(Self { nodes, grading: f64::NAN, p_max })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// `NaN` for grids built from explicit nodes.
    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Index of the node equal to `p` (relative tolerance 1e-12).
    pub fn node_index(&self, p: f64) -> Option<usize> {
        self.nodes.iter().position(|&q| (q - p).abs() <= 1e-12 * p.abs().max(1.0))
    }
}

/// Trapezoid weights on `nodes[0..=n]`.
fn trapezoid_weights(nodes: &[f64], n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    for i in 0..n {
        let h = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// One term `w f(s_i) [(1 - theta) g(p_j) + theta g(p_{j+1})]` of the
/// product quadrature of `int_0^{p_n} f(s) g(p_n - s) ds`.
#[derive(Debug, Clone, Copy)]
struct ConvTerm {
    i: usize,
    w: f64,
    j: usize,
    theta: f64,
}

fn conv_plan(nodes: &[f64], n: usize) -> Vec<ConvTerm> {
    let w = trapezoid_weights(nodes, n);
    let pn = nodes[n];
    (0..=n)
        .filter(|_| n > 0)
        .map(|i| {
            let t = (pn - nodes[i]).max(0.0);
            // last j with nodes[j] <= t, kept below n so that j + 1 exists
            let j = match nodes[..=n].partition_point(|&q| q <= t) {
                0 => 0,
                k => (k - 1).min(n - 1),
            };
            let theta = ((t - nodes[j]) / (nodes[j + 1] - nodes[j])).clamp(0.0, 1.0);
            ConvTerm { i, w: w[i], j, theta }
        })
        .collect()
}

/// Trapezoid product quadrature of `int_0^{p_n} f(s) g(p_n - s) ds`, with `g`
/// interpolated linearly between nodes.
pub fn laplace_convolve(f: &[f64], g: &[f64], grid: &BorelGrid, n: usize) -> Result<f64> {
    let len = grid.len();
    if n >= len || f.len() <= n || g.len() <= n {
        return Err(Error::IndexOutOfRange { index: n, len: len.min(f.len()).min(g.len()) });
    }
    Ok(conv_plan(&grid.nodes, n)
        .iter()
        .map(|t| t.w * f[t.i] * ((1.0 - t.theta) * g[t.j] + t.theta * g[t.j + 1]))
        .sum())
}

/// Samples of the Borel-plane solution on a grid.
#[derive(Debug, Clone)]
pub struct BorelSolution {
    model: Model,
    data: FlowState,
    forcing: SpectralField,
    grid: BorelGrid,
    samples: Vec<FlowState>,
    seed_order: usize,
    seeded: usize,
}

impl BorelSolution {
    /// Reassembles a solution from stored samples; checks shapes only.
    pub fn from_parts(
        model: Model,
        data: FlowState,
        forcing: SpectralField,
        grid: BorelGrid,
        samples: Vec<FlowState>,
        seed_order: usize,
        seeded: usize,
    ) -> Result<Self> {
        model.check_state(&data)?;
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} samples for {} nodes", samples.len(), grid.len())));
        }
        for s in &samples {
            model.check_state(s)?;
        }
        let seeded = seeded.min(grid.len());
        Ok(Self { model, data, forcing, grid, samples, seed_order, seeded })
    }

    #[cfg(test)]
    pub(crate) fn from_samples_for_tests(problem: Problem, nodes: Vec<f64>, samples: Vec<FlowState>) -> Self {
        let lat = *samples[0].lattice();
        let model = Model::new(problem, PhysicalParams { dim: lat.dim(), ..Default::default() }, lat).unwrap();
        let forcing = SpectralField::zeros(lat, crate::spectral::FieldKind::Vector);
        let grid = BorelGrid::from_nodes(nodes).unwrap();
        Self::from_parts(model.clone(), model.zero_state(), forcing, grid, samples, 0, 1).unwrap()
    }

    pub fn problem(&self) -> Problem {
        self.model.problem()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn data(&self) -> &FlowState {
        &self.data
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    pub fn grid(&self) -> &BorelGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    pub fn samples(&self) -> &[FlowState] {
        &self.samples
    }

    pub fn sample(&self, n: usize) -> &FlowState {
        &self.samples[n]
    }

    pub fn seed_order(&self) -> usize {
        self.seed_order
    }

    /// Number of leading nodes filled from the Taylor series.
    pub fn seeded_nodes(&self) -> usize {
        self.seeded
    }

    /// Cubic (4-point Lagrange) interpolation of the samples at `p`.
    pub fn interpolate(&self, p: f64) -> FlowState {
        interpolate_states(&self.grid.nodes, &self.samples, p)
    }
}

/// Start index and weights of the 4-point Lagrange stencil around `t`.
pub(crate) fn lagrange4(nodes: &[f64], t: f64) -> (usize, [f64; 4]) {
    let len = nodes.len();
    if len < 4 {
        // fall back to linear interpolation on short grids
        let j = nodes.partition_point(|&q| q <= t).clamp(1, len - 1) - 1;
        let th = ((t - nodes[j]) / (nodes[j + 1] - nodes[j])).clamp(0.0, 1.0);
        return (j, [1.0 - th, th, 0.0, 0.0]);
    }
    let j = nodes.partition_point(|&q| q <= t).clamp(1, len - 1) - 1;
    let start = j.saturating_sub(1).min(len - 4);
    let x = &nodes[start..start + 4];
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (t - x[b]) / (x[a] - x[b]);
            }
        }
    }
    (start, w)
}

pub(crate) fn interpolate_states(nodes: &[f64], samples: &[FlowState], t: f64) -> FlowState {
    let (start, w) = lagrange4(nodes, t);
    let mut out = samples[start].scaled(w[0]);
    for (a, &wa) in w.iter().enumerate().skip(1) {
        if wa != 0.0 {
            out.axpy_unchecked(wa, &samples[start + a]);
        }
    }
    out
}

/// Kernel rows for every (field, |n|^2 shell) pair on a node set.
struct KernelBank {
    rows: [Vec<KernelRow>; 2],
    class: Vec<usize>,
}

impl KernelBank {
    fn new(model: &Model, nodes: &[f64]) -> Self {
        let lat = model.lattice();
        let (shells, class) = lat.shell_classes();
        let b2 = lat.base() * lat.base();
        let diff = model.diffusivities();
        let rows = diff.map(|d| {
            shells.par_iter().map(|&n2| KernelRow::new(d * b2 * n2 as f64, nodes)).collect()
        });
        Self { rows, class }
    }
}

/// `R(p_n)` from `Y(p_0..=p_n)`.
fn source_term(model: &Model, y0: &FlowState, ys: &[FlowState], nodes: &[f64], n: usize) -> FlowState {
    let yn = &ys[n];
    let mut r = model.coupling(yn);
    r.axpy_unchecked(1.0, &model.nonlinear(y0, yn));
    r.axpy_unchecked(1.0, &model.nonlinear(yn, y0));
    let plan = conv_plan(nodes, n);
    let terms: Vec<FlowState> = plan
        .par_iter()
        .map(|t| {
            let g = FlowState::lerp(&ys[t.j], &ys[t.j + 1], t.theta);
            model.nonlinear(&ys[t.i], &g)
        })
        .collect();
    for (t, v) in plan.iter().zip(&terms) {
        r.axpy_unchecked(t.w, v);
    }
    r
}

/// `Phi(p_n) Y1 + sum_i w_i H(p_n, p_i) R_i`.
fn kernel_step(bank: &KernelBank, y1: &FlowState, rs: &[FlowState], nodes: &[f64], n: usize) -> FlowState {
    let w = trapezoid_weights(nodes, n);
    let mut out = y1.clone();
    for (f, field) in out.fields_mut().into_iter().enumerate() {
        let rows = &bank.rows[f];
        // per-shell kernel weights for this node
        let hw: Vec<(f64, Vec<f64>)> = rows
            .iter()
            .map(|row| (row.heat(n), (0..n).map(|i| w[i] * row.h(nodes, n, i)).collect()))
            .collect();
        let nc = field.ncomp();
        let data = field.data_mut();
        for (idx, &cls) in bank.class.iter().enumerate() {
            let (heat, ref hv) = hw[cls];
            for c in 0..nc {
                let mut acc = data[idx * nc + c] * heat;
                for (i, &h) in hv.iter().enumerate() {
                    if h != 0.0 {
                        acc += rs[i].fields()[f].data()[idx * nc + c] * h;
                    }
                }
                data[idx * nc + c] = acc;
            }
        }
    }
    out
}

/// Marches the integral equation of `model` over `grid`.
///
/// Nodes up to `min(radius/4, 8 p_1)` whose series truncation estimate is at
/// most `tol` (relative to the local magnitude) are filled from the Taylor
/// series of order `seed_order`; the rest are computed explicitly, since the
/// kernel vanishes on the diagonal and the current node never enters its own
/// right-hand side.
pub fn march(
    model: &Model,
    y0: &FlowState,
    forcing: &SpectralField,
    grid: &BorelGrid,
    seed_order: usize,
    tol: f64,
) -> Result<BorelSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let series = borel_series(model, y0, forcing, seed_order.max(1))?;
    let y1 = series.coeff(0).clone();
    let nodes = grid.nodes.clone();
    let radius = if seed_order >= 8 {
        let np = NormParams::l1_linf(model.lattice().dim())?;
        radius_estimate(&series, &np)?.radius()
    } else {
        f64::INFINITY
    };
    let p_switch = (0.25 * radius).min(8.0 * nodes[1]);
    let mut samples: Vec<FlowState> = vec![y1.clone()];
    for &p in &nodes[1..] {
        if p > p_switch || seed_order == 0 {
            break;
        }
        let v = eval_series(&series, p)?;
        if v.truncation > tol * v.value.max_abs().max(1.0) {
            break;
        }
        samples.push(v.value);
    }
    let seeded = samples.len();
    let mut rs: Vec<FlowState> = Vec::with_capacity(nodes.len());
    for n in 0..seeded {
        rs.push(source_term(model, y0, &samples, &nodes, n));
    }
    let bank = KernelBank::new(model, &nodes);
    for n in seeded..nodes.len() {
        let yn = kernel_step(&bank, &y1, &rs, &nodes, n);
        if !yn.max_abs().is_finite() {
            return Err(Error::MarchFailure { node: n, p: nodes[n], reason: "non-finite value".into() });
        }
        samples.push(yn);
        let rn = source_term(model, y0, &samples, &nodes, n);
        if !rn.max_abs().is_finite() {
            return Err(Error::MarchFailure { node: n, p: nodes[n], reason: "non-finite source term".into() });
        }
        rs.push(rn);
    }
    BorelSolution::from_parts(model.clone(), y0.clone(), forcing.clone(), grid.clone(), samples, seed_order, seeded)
}

#[allow(clippy::too_many_arguments)]
pub fn march_boussinesq(
    u0: &SpectralField,
    theta0: &SpectralField,
    forcing: &SpectralField,
    params: &PhysicalParams,
    grid: &BorelGrid,
    seed_order: usize,
    tol: f64,
) -> Result<BorelSolution> {
    let y0 = FlowState::new(Problem::Boussinesq, u0.clone(), theta0.clone())?;
    let model = Model::new(Problem::Boussinesq, *params, *u0.lattice())?;
    march(&model, &y0, forcing, grid, seed_order, tol)
}

#[allow(clippy::too_many_arguments)]
pub fn march_mhd(
    v0: &SpectralField,
    b0: &SpectralField,
    forcing: &SpectralField,
    params: &PhysicalParams,
    grid: &BorelGrid,
    seed_order: usize,
    tol: f64,
) -> Result<BorelSolution> {
    let y0 = FlowState::new(Problem::Mhd, v0.clone(), b0.clone())?;
    let model = Model::new(Problem::Mhd, *params, *v0.lattice())?;
    march(&model, &y0, forcing, grid, seed_order, tol)
}

/// Defect of the stored samples in the integral equation, re-evaluated on a
/// grid with every interval split into `refinement` pieces.
///
/// The samples are interpolated by cubic Lagrange polynomials; the inner
/// Laplace convolution and the outer kernel integral use the trapezoid rule on
/// the refined points, and `R` between original nodes is interpolated cubically.
/// Returns `max |lhs - rhs| / (1 + |lhs|)` over nodes, modes and components.
pub fn residual_integral_eq(sol: &BorelSolution, refinement: usize) -> Result<f64> {
    if refinement == 0 {
        return Err(Error::InvalidParameter("refinement must be at least 1".into()));
    }
    let model = &sol.model;
    let nodes = &sol.grid.nodes;
    let mut fine = Vec::with_capacity((nodes.len() - 1) * refinement + 1);
    for w in nodes.windows(2) {
        for j in 0..refinement {
            fine.push(w[0] + (w[1] - w[0]) * j as f64 / refinement as f64);
        }
    }
    fine.push(*nodes.last().expect("nonempty"));
    let ys_fine: Vec<FlowState> = fine.par_iter().map(|&p| sol.interpolate(p)).collect();
    // R at the original nodes, inner convolution on the refined points
    let rs: Vec<FlowState> = (0..nodes.len())
        .into_par_iter()
        .map(|n| {
            let m = n * refinement;
            let yn = &sol.samples[n];
            let mut r = model.coupling(yn);
            r.axpy_unchecked(1.0, &model.nonlinear(&sol.data, yn));
            r.axpy_unchecked(1.0, &model.nonlinear(yn, &sol.data));
            let w = trapezoid_weights(&fine, m);
            for i in 0..=m {
                if m == 0 {
                    break;
                }
                let g = sol.interpolate(nodes[n] - fine[i]);
                r.axpy_unchecked(w[i], &model.nonlinear(&ys_fine[i], &g));
            }
            r
        })
        .collect();
    let rs_fine: Vec<FlowState> = fine.iter().map(|&p| interpolate_states(nodes, &rs, p)).collect();
    let bank = KernelBank::new(model, &fine);
    let y1 = &sol.samples[0];
    let worst = (0..nodes.len())
        .into_par_iter()
        .map(|n| {
            let rhs = if n == 0 { y1.clone() } else { kernel_step(&bank, y1, &rs_fine, &fine, n * refinement) };
            let lhs = &sol.samples[n];
            let mut worst = 0.0f64;
            for (a, b) in lhs.fields().into_iter().zip(rhs.fields()) {
                for (x, y) in a.data().iter().zip(b.data()) {
                    worst = worst.max((x - y).norm() / (1.0 + x.norm()));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::two_j1_over_z;
    use crate::fixtures;
    use crate::spectral::{FieldKind, ModeLattice};
    use crate::taylor::series_boussinesq;
    use num_complex::Complex64;

    #[test]
    fn grid_examples() {
        assert_eq!(build_grid(1.0, 4, 1.0).unwrap().nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(build_grid(1.0, 2, 2.0).unwrap().nodes(), &[0.0, 0.25, 1.0]);
        let u = build_grid(3.0, 16, 1.0).unwrap();
        let g = build_grid(3.0, 16, 2.0).unwrap();
        assert!(g.nodes()[1] < u.nodes()[1]);
        assert!(build_grid(0.0, 8, 1.0).is_err());
        assert!(build_grid(1.0, 8, 0.5).is_err());
        assert!(BorelGrid::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn convolution_quadrature() {
        let grid = build_grid(1.0, 64, 1.0).unwrap();
        let p = grid.nodes().to_vec();
        let ones = vec![1.0; p.len()];
        for n in [1, 10, 64] {
            assert!((laplace_convolve(&ones, &ones, &grid, n).unwrap() - p[n]).abs() < 1e-14);
        }
        let v = laplace_convolve(&ones, &p, &grid, 64).unwrap();
        assert!((v - 0.5).abs() <= 1e-3);
        assert!(laplace_convolve(&ones, &p, &grid, 65).is_err());
        // f = g = p: second order under halving
        let err = |n: usize| {
            let grid = build_grid(1.0, n, 1.0).unwrap();
            let p = grid.nodes().to_vec();
            (laplace_convolve(&p, &p, &grid, n).unwrap() - 1.0 / 6.0).abs()
        };
        let ratio = err(32) / err(64);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        // graded grids interpolate g off-node
        let grid = build_grid(1.0, 200, 2.0).unwrap();
        let p = grid.nodes().to_vec();
        let ones = vec![1.0; p.len()];
        let v = laplace_convolve(&ones, &p, &grid, 200).unwrap();
        assert!((v - 0.5).abs() < 1e-4);
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let nodes: Vec<f64> = (0..10).map(|i| (i as f64 / 9.0).powi(2)).collect();
        for t in [0.0, 0.003, 0.4, 0.77, 1.0] {
            let (s, w) = lagrange4(&nodes, t);
            let v: f64 = (0..4).map(|a| w[a] * nodes[s + a].powi(3)).sum();
            assert!((v - t.powi(3)).abs() < 1e-14);
        }
    }

    fn heat_setup() -> (SpectralField, SpectralField, SpectralField, PhysicalParams) {
        let lat = ModeLattice::new(1.0, 3, 2).unwrap();
        let u0 = fixtures::shear_mode(lat, 1, 1.0).unwrap();
        let th = SpectralField::zeros(lat, FieldKind::Scalar);
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        (u0, th, f, PhysicalParams { nu: 0.8, ..Default::default() })
    }

    #[test]
    fn zero_data_marches_to_zero() {
        let (u0, th, f, p) = heat_setup();
        let grid = build_grid(2.0, 16, 2.0).unwrap();
        let sol = march_boussinesq(&u0.scaled(0.0.into()), &th, &f, &p, &grid, 10, 1e-12).unwrap();
        assert!(sol.samples().iter().all(|s| s.is_zero()));
        let z = SpectralField::zeros(*u0.lattice(), FieldKind::Vector);
        let sol = march_mhd(&z, &z, &z, &p, &grid, 10, 1e-12).unwrap();
        assert!(sol.samples().iter().all(|s| s.is_zero()));
        assert_eq!(residual_integral_eq(&sol, 2).unwrap(), 0.0);
    }

    #[test]
    fn heat_mode_is_bessel() {
        let (u0, th, f, p) = heat_setup();
        let grid = build_grid(10.0, 256, 2.0).unwrap();
        let sol = march_boussinesq(&u0, &th, &f, &p, &grid, 20, 1e-12).unwrap();
        let y1 = sol.sample(0).clone();
        assert_eq!(y1.primary().max_abs_diff(&u0.scaled(Complex64::from(-p.nu))).unwrap(), 0.0);
        for (n, &pn) in sol.nodes().iter().enumerate() {
            let want = y1.scaled(two_j1_over_z(2.0 * (p.nu * pn).sqrt()));
            let err = sol.sample(n).max_abs_diff(&want).unwrap();
            assert!(err <= 1e-8 * y1.max_abs(), "node {n}: {err:e}");
        }
        assert!(residual_integral_eq(&sol, 2).unwrap() <= 1e-7);
    }

    #[test]
    fn march_matches_series_on_nonlinear_data() {
        let lat = ModeLattice::new(1.0, 4, 2).unwrap();
        let p = PhysicalParams { nu: 0.5, mu_thermal: 0.7, buoyancy_a: 0.6, ..Default::default() };
        let y0 = fixtures::two_mode_state(Problem::Boussinesq, lat, 0.5).unwrap();
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        let series = series_boussinesq(y0.primary(), y0.companion(), &f, &p, 40).unwrap();
        let grid = build_grid(0.5, 128, 2.0).unwrap();
        let sol = march_boussinesq(y0.primary(), y0.companion(), &f, &p, &grid, 20, 1e-12).unwrap();
        let scale = sol.sample(0).max_abs();
        for (n, &pn) in sol.nodes().iter().enumerate() {
            let want = eval_series(&series, pn).unwrap().value;
            let err = sol.sample(n).max_abs_diff(&want).unwrap();
            // second-order march error at 128 graded nodes
            assert!(err <= 1e-5 * scale, "node {n} p {pn}: {err:e}");
            assert!(sol.sample(n).divergence_defect() <= 1e-12);
            assert!(sol.sample(n).conjugate_symmetry_defect() <= 1e-12 * scale);
        }
    }

    #[test]
    fn residual_is_second_order() {
        // u0 = 0, one temperature mode along x: the transport terms vanish and
        // the velocity is the buoyancy-driven mixture of two Bessel profiles
        let lat = ModeLattice::new(1.0, 2, 2).unwrap();
        let p = PhysicalParams { nu: 0.6, mu_thermal: 1.4, buoyancy_a: 2.0, ..Default::default() };
        let th = fixtures::cosine_scalar(lat, 1, 1.0).unwrap();
        let u0 = SpectralField::zeros(lat, FieldKind::Vector);
        let f = u0.clone();
        let res = |n: usize| {
            let grid = build_grid(4.0, n, 2.0).unwrap();
            let sol = march_boussinesq(&u0, &th, &f, &p, &grid, 0, 1e-12).unwrap();
            residual_integral_eq(&sol, 2).unwrap()
        };
        let (a, b) = (res(32), res(64));
        let ratio = a / b;
        assert!((3.5..=4.5).contains(&ratio), "{a:e} {b:e} ratio {ratio}");
    }
}
