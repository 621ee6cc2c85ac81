//! Back to the time domain: Laplace reconstruction of the Borel-plane
//! solution, the Runge-Kutta oracle on the same Galerkin system, physical-space
//! evaluation and the ODE defect of a trajectory.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::march::{lagrange4, BorelSolution};
use crate::spectral::{FlowState, Model, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    Laplace,
    Rk4,
}

#[derive(Debug, Clone)]
pub struct TimeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub source: TrajectorySource,
}

fn gl8() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8).expect("degree >= 2").as_node_weight_pairs().to_vec())
}

/// Sub-panel edges of `[a, b]` resolving `e^{-p/t}`: steps of `t` doubling
/// away from `a`, stopped once the weight has dropped by `e^{-40}`.
fn exp_panels(a: f64, b: f64, t: f64) -> Vec<f64> {
    let mut edges = vec![a];
    let mut step = t.min(b - a);
    let mut x = a;
    while x < b {
        x = (x + step).min(b);
        edges.push(x);
        if x - a > 40.0 * t {
            break;
        }
        step *= 2.0;
    }
    edges
}

/// `Y0 + int_0^inf Y(p) e^{-p/t} dp`.
///
/// On each grid interval the samples are interpolated by the cubic through the
/// four nearest nodes and integrated against the exponential with 8-point
/// Gauss-Legendre panels refined on the scale `t`. Beyond the grid the
/// integrand is continued as `Y(p_max) e^{r (p - p_max)}`, with `r` fitted to
/// the growth of the sample norm over the last tenth of the grid.
pub fn laplace_eval(sol: &BorelSolution, t: f64, omega: f64) -> Result<FlowState> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if 1.0 / t <= omega {
        return Err(Error::ValidityRegion { t, omega });
    }
    let nodes = sol.nodes();
    let samples = sol.samples();
    let m = nodes.len();
    // per-node weights accumulated from every panel, then one pass over the states
    let weights: Vec<f64> = (0..m - 1)
        .into_par_iter()
        .map(|i| {
            let mut w = vec![0.0; m];
            let (a, b) = (nodes[i], nodes[i + 1]);
            if (a / t) > 745.0 {
                return w;
            }
            let edges = exp_panels(a, b, t);
            for e in edges.windows(2) {
                let (lo, hi) = (e[0], e[1]);
                let half = 0.5 * (hi - lo);
                for &(x, wx) in gl8() {
                    let p = lo + half * (x + 1.0);
                    let ew = wx * half * (-p / t).exp();
                    let (start, lw) = lagrange4(nodes, p);
                    for (k, &l) in lw.iter().enumerate() {
                        if l != 0.0 {
                            w[start + k] += ew * l;
                        }
                    }
                }
            }
            w
        })
        .collect::<Vec<_>>()
        .into_iter()
        // summed in interval order so results do not depend on the thread count
        .fold(vec![0.0; m], |mut acc, w| {
            acc.iter_mut().zip(w).for_each(|(a, b)| *a += b);
            acc
        });
    let mut out = sol.data().clone();
    for (w, y) in weights.iter().zip(samples) {
        if *w != 0.0 {
            out.axpy_unchecked(*w, y);
        }
    }
    // exponential continuation past the grid
    let p_end = nodes[m - 1];
    let tail_weight = (-p_end / t).exp();
    if tail_weight > 0.0 {
        let start = m - 1 - ((m - 1) / 10).max(1);
        let (y_a, y_b) = (samples[start].max_abs(), samples[m - 1].max_abs());
        let r = if y_a > 0.0 && y_b > 0.0 { (y_b / y_a).ln() / (p_end - nodes[start]) } else { 0.0 };
        if 1.0 / t <= r {
            return Err(Error::ValidityRegion { t, omega: r });
        }
        out.axpy_unchecked(tail_weight / (1.0 / t - r), &samples[m - 1]);
    }
    Ok(out)
}

/// [`laplace_eval`] at several times.
pub fn laplace_trajectory(sol: &BorelSolution, times: &[f64], omega: f64) -> Result<TimeTrajectory> {
    let states = times.iter().map(|&t| laplace_eval(sol, t, omega)).collect::<Result<Vec<_>>>()?;
    Ok(TimeTrajectory { times: times.to_vec(), states, source: TrajectorySource::Laplace })
}

/// Norm above which an integration counts as blown up.
const BLOW_UP: f64 = 1e12;

fn rk4_step(model: &Model, y: &FlowState, f: &SpectralField, dt: f64) -> FlowState {
    let k1 = model.rhs(y, f);
    let mut y2 = y.clone();
    y2.axpy_unchecked(0.5 * dt, &k1);
    let k2 = model.rhs(&y2, f);
    let mut y3 = y.clone();
    y3.axpy_unchecked(0.5 * dt, &k2);
    let k3 = model.rhs(&y3, f);
    let mut y4 = y.clone();
    y4.axpy_unchecked(dt, &k3);
    let k4 = model.rhs(&y4, f);
    let mut out = y.clone();
    out.axpy_unchecked(dt / 6.0, &k1);
    out.axpy_unchecked(dt / 3.0, &k2);
    out.axpy_unchecked(dt / 3.0, &k3);
    out.axpy_unchecked(dt / 6.0, &k4);
    out
}

fn check_rk4_inputs(model: &Model, y0: &FlowState, forcing: &SpectralField, dt: f64) -> Result<()> {
    model.check_data(y0)?;
    model.check_forcing(forcing)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Fixed-step classical Runge-Kutta on the Galerkin system, every step recorded
/// (the first sample is `t = 0`). The last step is shortened to land on `t_end`.
pub fn galerkin_rk4(model: &Model, y0: &FlowState, forcing: &SpectralField, t_end: f64, dt: f64) -> Result<TimeTrajectory> {
    check_rk4_inputs(model, y0, forcing, dt)?;
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut t = 0.0;
    for _ in 0..steps {
        let h = dt.min(t_end - t);
        if h <= 0.0 {
            break;
        }
        let next = rk4_step(model, states.last().expect("nonempty"), forcing, h);
        t += h;
        guard(&next, t)?;
        times.push(t);
        states.push(next);
    }
    Ok(TimeTrajectory { times, states, source: TrajectorySource::Rk4 })
}

fn guard(y: &FlowState, t: f64) -> Result<()> {
    let norm = y.l2();
    if !norm.is_finite() || norm > BLOW_UP {
        return Err(Error::BlowUp { time: t, norm });
    }
    Ok(())
}

/// Runge-Kutta states at the requested increasing times only.
pub fn galerkin_rk4_at(
    model: &Model,
    y0: &FlowState,
    forcing: &SpectralField,
    times: &[f64],
    dt: f64,
) -> Result<TimeTrajectory> {
    check_rk4_inputs(model, y0, forcing, dt)?;
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("times must be nonnegative and increasing".into()));
    }
    let mut y = y0.clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        // equal steps no longer than dt on each segment
        let n = ((target - t) / dt).ceil() as usize;
        if n > 0 {
            let h = (target - t) / n as f64;
            for j in 0..n {
                y = rk4_step(model, &y, forcing, h);
                guard(&y, t + (j + 1) as f64 * h)?;
            }
        }
        t = target;
        states.push(y.clone());
    }
    Ok(TimeTrajectory { times: times.to_vec(), states, source: TrajectorySource::Rk4 })
}

/// `sum_k a(k) e^{i k.x}` at each point; one value per component.
///
/// Points carry `dim` coordinates. The field must be conjugate-symmetric; the
/// imaginary residue is checked against `1e-12` of the magnitude and dropped.
pub fn physical_eval(field: &SpectralField, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let lat = field.lattice();
    let scale = field.max_abs();
    let defect = field.conjugate_symmetry_defect();
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotConjugateSymmetric { defect });
    }
    let nc = field.ncomp();
    let modes: Vec<usize> = (0..lat.len()).filter(|&i| field.mode_magnitude(i) > 0.0).collect();
    points
        .par_iter()
        .map(|x| {
            if x.len() != lat.dim() {
                return Err(Error::InvalidParameter(format!("point has {} coordinates, lattice dim {}", x.len(), lat.dim())));
            }
            let mut acc = vec![Complex64::new(0.0, 0.0); nc];
            let mut mag = 0.0;
            for &idx in &modes {
                let k = lat.wavevector(idx);
                let phase: f64 = x.iter().zip(k.iter()).map(|(a, b)| a * b).sum();
                let e = Complex64::from_polar(1.0, phase);
                for (c, a) in acc.iter_mut().zip(field.amplitude(idx)) {
                    *c += a * e;
                    mag += a.norm();
                }
            }
            let worst = acc.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            if worst > 1e-12 * mag.max(f64::MIN_POSITIVE) {
                return Err(Error::NotConjugateSymmetric { defect: worst });
            }
            Ok(acc.iter().map(|c| c.re).collect())
        })
        .collect()
}

/// Largest `|dY/dt - rhs(Y)| / max(|rhs(Y)|, |Y|)` over interior samples, with
/// the time derivative from central differences.
pub fn pde_residual(traj: &TimeTrajectory, forcing: &SpectralField, model: &Model) -> Result<f64> {
    let n = traj.states.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let worst = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            let (t0, t1, t2) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
            let (y0, y1, y2) = (&traj.states[i - 1], &traj.states[i], &traj.states[i + 1]);
            // three-point derivative, exact for quadratics on uneven spacing
            let (h0, h1) = (t1 - t0, t2 - t1);
            let mut d = y2.scaled(h0 / (h1 * (h0 + h1)));
            d.axpy_unchecked(-h1 / (h0 * (h0 + h1)), y0);
            d.axpy_unchecked((h1 - h0) / (h0 * h1), y1);
            let rhs = model.rhs(y1, forcing);
            let scale = rhs.max_abs().max(y1.max_abs());
            if scale == 0.0 {
                return 0.0;
            }
            d.max_abs_diff(&rhs).expect("same lattice") / scale
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::march::{build_grid, march_boussinesq};
    use crate::spectral::{FieldKind, ModeLattice, PhysicalParams, Problem};

    fn lat() -> ModeLattice {
        ModeLattice::new(1.0, 3, 2).unwrap()
    }

    fn heat() -> (BorelSolution, FlowState, PhysicalParams) {
        let lat = lat();
        let p = PhysicalParams { nu: 0.8, ..Default::default() };
        let u0 = fixtures::shear_mode(lat, 1, 1.0).unwrap();
        let th = SpectralField::zeros(lat, FieldKind::Scalar);
        let grid = build_grid(10.0, 256, 2.0).unwrap();
        let sol = march_boussinesq(&u0, &th, &SpectralField::zeros(lat, FieldKind::Vector), &p, &grid, 20, 1e-12).unwrap();
        let y0 = fixtures::velocity_only(Problem::Boussinesq, u0).unwrap();
        (sol, y0, p)
    }

    #[test]
    fn laplace_heat_closed_form() {
        let (sol, y0, p) = heat();
        for t in [0.01, 0.1] {
            let got = laplace_eval(&sol, t, 1.0).unwrap();
            let want = y0.scaled((-p.nu * t).exp());
            let err = got.max_abs_diff(&want).unwrap();
            assert!(err <= 1e-8, "t {t}: {err:e}");
        }
        let got = laplace_eval(&sol, 1e-6, 1.0).unwrap();
        assert!(got.max_abs_diff(&y0).unwrap() <= 1e-5);
        assert!(matches!(laplace_eval(&sol, 2.0, 1.0), Err(Error::ValidityRegion { .. })));
    }

    #[test]
    fn rk4_zero_and_heat() {
        let lat = lat();
        let p = PhysicalParams { nu: 0.8, ..Default::default() };
        let model = Model::new(Problem::Boussinesq, p, lat).unwrap();
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        let z = model.zero_state();
        let tr = galerkin_rk4(&model, &z, &f, 0.5, 0.01).unwrap();
        assert!(tr.states.iter().all(|s| s.is_zero()));
        let y0 = fixtures::velocity_only(Problem::Boussinesq, fixtures::shear_mode(lat, 1, 1.0).unwrap()).unwrap();
        let tr = galerkin_rk4(&model, &y0, &f, 1.0, 1e-3).unwrap();
        assert!((tr.times.last().unwrap() - 1.0).abs() < 1e-12);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!(s.max_abs_diff(&y0.scaled((-p.nu * t).exp())).unwrap() <= 1e-10);
        }
        let r = pde_residual(&tr, &f, &model).unwrap();
        assert!(r <= 1e-5, "{r:e}");
    }

    #[test]
    fn rk4_fourth_order() {
        let lat = lat();
        let p = PhysicalParams { nu: 0.3, mu_thermal: 0.4, buoyancy_a: 0.5, ..Default::default() };
        let model = Model::new(Problem::Boussinesq, p, lat).unwrap();
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        let y0 = fixtures::two_mode_state(Problem::Boussinesq, lat, 1.0).unwrap();
        let end = |dt: f64| galerkin_rk4_at(&model, &y0, &f, &[0.5], dt).unwrap().states.pop().unwrap();
        let (a, b, c) = (end(0.05), end(0.025), end(0.0125));
        let ratio = a.max_abs_diff(&b).unwrap() / b.max_abs_diff(&c).unwrap();
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
        let tr = galerkin_rk4(&model, &y0, &f, 0.2, 1e-3).unwrap();
        assert!(pde_residual(&tr, &f, &model).unwrap() <= 1e-4);
    }

    #[test]
    fn steady_forced_state() {
        let lat = lat();
        let p = PhysicalParams { nu: 0.8, ..Default::default() };
        let model = Model::new(Problem::Boussinesq, p, lat).unwrap();
        let u0 = fixtures::shear_mode(lat, 1, 1.0).unwrap();
        // f = nu |k|^2 u0 balances diffusion of the shear
        let f = u0.scaled(Complex64::from(p.nu * lat.base() * lat.base()));
        let y0 = fixtures::velocity_only(Problem::Boussinesq, u0).unwrap();
        let tr = galerkin_rk4(&model, &y0, &f, 0.1, 1e-3).unwrap();
        assert!(pde_residual(&tr, &f, &model).unwrap() <= 1e-10);
        let short = TimeTrajectory { times: tr.times[..2].to_vec(), states: tr.states[..2].to_vec(), source: TrajectorySource::Rk4 };
        assert!(matches!(pde_residual(&short, &f, &model), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let lat = lat();
        let model = Model::new(Problem::Boussinesq, PhysicalParams { nu: 1e-3, ..Default::default() }, lat).unwrap();
        let y0 = fixtures::two_mode_state(Problem::Boussinesq, lat, 1e5).unwrap();
        let f = SpectralField::zeros(lat, FieldKind::Vector);
        assert!(matches!(galerkin_rk4(&model, &y0, &f, 1.0, 0.1), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn physical_values() {
        let lat = lat();
        let f = fixtures::shear_mode(lat, 2, 3.0).unwrap();
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![0.3 * i as f64, 0.17 * i as f64]).collect();
        let v = physical_eval(&f, &pts).unwrap();
        for (x, val) in pts.iter().zip(&v) {
            assert!((val[0] - 3.0 * (2.0 * x[1]).cos()).abs() < 1e-14);
            assert_eq!(val[1], 0.0);
        }
        let z = SpectralField::zeros(lat, FieldKind::Scalar);
        assert!(physical_eval(&z, &pts).unwrap().iter().all(|v| v[0] == 0.0));
        let mut bad = SpectralField::zeros(lat, FieldKind::Scalar);
        bad.set_mode(&[1, 0], &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(physical_eval(&bad, &pts).is_err());
    }

    #[test]
    fn parseval() {
        let lat = lat();
        let y = fixtures::two_mode_state(Problem::Boussinesq, lat, 1.3).unwrap();
        let u = y.primary();
        let n = 16;
        let pts: Vec<Vec<f64>> = (0..n * n)
            .map(|i| {
                let h = 2.0 * std::f64::consts::PI / n as f64;
                vec![h * (i / n) as f64, h * (i % n) as f64]
            })
            .collect();
        let vals = physical_eval(u, &pts).unwrap();
        let mean: f64 = vals.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>()).sum::<f64>() / pts.len() as f64;
        let spec: f64 = u.data().iter().map(|c| c.norm_sqr()).sum();
        assert!((mean - spec).abs() < 1e-12 * spec);
    }
}
