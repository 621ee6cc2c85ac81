//! Growth-rate bounds for the Borel-plane solution: the a-priori rate from the
//! contraction argument, the coefficient-bound constants `(A0, D0)`, and the
//! improved rate computed from a solution known on `[0, p0]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{kernel_h, two_j1_over_z, KernelTable};
use crate::error::{Error, Result};
use crate::march::{interpolate_states, BorelSolution};
use crate::norms::{c7_constant, field_norm, ConstantsBundle, NormKind, NormParams};
use crate::spectral::{FlowState, Model, PhysicalParams, Problem};

/// Smallest growth rate ever reported.
pub const OMEGA_FLOOR: f64 = 1e-6;
/// Multiplicative margin turning the critical values into strict inequalities.
pub const MARGIN: f64 = 1.01;
/// Cap on the local interval when the data vanish.
const L_BALL_CAP: f64 = 1e6;

/// `||Y0||` and `||Y1||` of the pair (data, first Borel coefficient).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataNorms {
    pub data: f64,
    pub first: f64,
}

impl DataNorms {
    pub fn of(y0: &FlowState, y1: &FlowState, nparams: &NormParams) -> Self {
        Self { data: field_norm(y0, nparams), first: field_norm(y1, nparams) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBounds {
    pub a0: f64,
    pub d0: f64,
    /// `1 / (4 D0)`.
    pub radius_lower_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub omega: f64,
    pub l_ball: f64,
    pub constants: ConstantsBundle,
    /// Only available for the analytic `(gamma, beta)` norms.
    pub a0d0: Option<f64>,
    pub radius_lower_bound: Option<f64>,
}

/// Left side of the contraction condition for the growth rate `omega`.
pub fn growth_lhs(problem: Problem, norms: &DataNorms, c: &ConstantsBundle, omega: f64) -> f64 {
    let inner = 2.0 * norms.first / omega + norms.data;
    match problem {
        Problem::Boussinesq => 2.0 * c.c2 * PI.sqrt() * omega.powf(-0.5) * inner + 2.0 * c.c3 / omega,
        Problem::Mhd => 2.0 * c.c4 * PI.sqrt() * omega.powf(-0.5) * inner,
    }
}

/// Left side of the small-interval condition on `[0, L]`.
pub fn ball_lhs(problem: Problem, norms: &DataNorms, c: &ConstantsBundle, l: f64) -> f64 {
    let inner = 2.0 * l * norms.first + norms.data;
    match problem {
        Problem::Boussinesq => 2.0 * c.c2 * l.sqrt() * inner + 2.0 * c.c3 * l,
        Problem::Mhd => 2.0 * c.c4 * l.sqrt() * inner,
    }
}

/// Bisection in `ln x` for the crossing of a monotone function with 1.
fn crossing(f: impl Fn(f64) -> f64, increasing: bool) -> Option<f64> {
    let below = |x: f64| f(x) < 1.0;
    // the sought root separates `below == !increasing` from `below == increasing`
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if below(1.0) == increasing {
        while below(hi) == increasing {
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        lo = hi / 2.0;
    } else {
        while below(lo) != increasing {
            lo /= 2.0;
            if lo < 1e-300 {
                return None;
            }
        }
        hi = lo * 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if below(mid) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Some(if increasing { lo } else { hi })
}

/// Smallest admissible growth rate (times [`MARGIN`]) and the local interval.
///
/// `(A0 D0, 1/(4 D0))` are attached when `nparams` is a `(gamma, beta)` norm
/// with `beta > 0`.
pub fn apriori_growth(
    problem: Problem,
    norms: &DataNorms,
    constants: &ConstantsBundle,
    params: &PhysicalParams,
    nparams: &NormParams,
) -> Result<GrowthEstimate> {
    if !(norms.data.is_finite() && norms.first.is_finite()) {
        return Err(Error::InvalidParameter("data norms must be finite".into()));
    }
    let lhs = |w: f64| growth_lhs(problem, norms, constants, w);
    // decreasing in omega; identically zero data never cross
    let omega = match crossing(lhs, false) {
        Some(root) => (root * MARGIN).max(OMEGA_FLOOR),
        None => OMEGA_FLOOR,
    };
    let ball = |l: f64| ball_lhs(problem, norms, constants, l);
    let l_ball = match crossing(ball, true) {
        Some(root) => (root / MARGIN).min(L_BALL_CAP),
        None => L_BALL_CAP,
    };
    let bounds = if nparams.kind == NormKind::GammaBeta && nparams.beta > 0.0 {
        Some(series_bound_constants(problem, norms, constants, params, nparams)?)
    } else {
        None
    };
    Ok(GrowthEstimate {
        omega,
        l_ball,
        constants: *constants,
        a0d0: bounds.map(|b| b.a0 * b.d0),
        radius_lower_bound: bounds.map(|b| b.radius_lower_bound),
    })
}

/// Largest real root of `x^3 - c1 x^2 - c2 x - c3` for nonnegative `c`.
fn cubic_root(c1: f64, c2: f64, c3: f64) -> f64 {
    let f = |x: f64| ((x - c1) * x - c2) * x - c3;
    // f < 0 on (0, root) and f > 0 beyond
    let mut hi = 1.0f64.max(c1 + c2.sqrt() + c3.cbrt()) * 2.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `(A0, D0)` of the coefficient bound
/// `|c_l(k)| <= e^{-beta|k|} A0 D0^l (1+|k|)^{-gamma} Q_{2l}(beta|k|) / (2l+1)^2`.
///
/// `A0 D0` is the base-case product; `D0` is the largest value demanded by the
/// second-order condition and by the induction step (in both the form with the
/// `||Y1||` term multiplied by `D0` and the form without).
pub fn series_bound_constants(
    problem: Problem,
    norms: &DataNorms,
    constants: &ConstantsBundle,
    params: &PhysicalParams,
    nparams: &NormParams,
) -> Result<SeriesBounds> {
    if nparams.kind != NormKind::GammaBeta || !(nparams.beta > 0.0) {
        return Err(Error::BetaZero);
    }
    let (g, beta) = (nparams.gamma, nparams.beta);
    let bd = beta.powi(nparams.dim as i32);
    let c7 = c7_constant(nparams.dim)?;
    let c0 = constants.c0;
    let (y0, y1) = (norms.data, norms.first);
    let conv = 2f64.powf(g) * 9.0 * c7 * PI / bd;
    let (p_prod, d_linear, c1, c_u1, c3) = match problem {
        Problem::Boussinesq => {
            let bracket = c0 * beta * y0 + constants.m1 + params.buoyancy_a * beta * beta;
            let p = 9.0 / (beta * beta) * y1 * bracket;
            // C0 ||Y1||^2 / (P beta) with P cancelled
            let last = c0 * y1 * beta / (9.0 * bracket);
            let lin = 6.0 * constants.m1 / (beta * beta) + params.buoyancy_a + conv * y0 + last;
            let c1 = 6.0 * constants.m1 / (beta * beta) + 0.5 * params.buoyancy_a + conv * y0;
            let c3 = 2f64.powf(g + 1.0) * c7 * p / bd;
            (p, lin, c1, conv * y1 / 4.0, c3)
        }
        Problem::Mhd => {
            let m3 = constants.m3;
            let bracket = constants.m2 * m3 * (1.0 + c0 * beta * y0);
            let p = 9.0 / (beta * beta) * y1 * bracket;
            let last = 2.0 * c0 * m3 * y1 * beta / (9.0 * bracket);
            let lin = 6.0 * constants.m2 / (beta * beta) + 2.0 * conv * m3 * y0 + last;
            let c1 = 6.0 * constants.m2 / (beta * beta) + 2.0 * conv * m3 * y0;
            let c3 = m3 * 2f64.powf(g + 2.0) * c7 * p / bd;
            (p, lin, c1, 2.0 * conv * m3 * y1 / 4.0, c3)
        }
    };
    if p_prod == 0.0 {
        return Ok(SeriesBounds { a0: 0.0, d0: OMEGA_FLOOR, radius_lower_bound: 0.25 / OMEGA_FLOOR });
    }
    let d0 = d_linear.max(cubic_root(c1, c_u1, c3)).max(cubic_root(c1 + c_u1, 0.0, c3)) * MARGIN;
    Ok(SeriesBounds { a0: p_prod / d0, d0, radius_lower_bound: 0.25 / d0 })
}

/// `(H, S)^(s)` split by origin.
#[derive(Debug, Clone)]
pub struct TailParts {
    /// `Phi(p) Y1`.
    pub homogeneous: FlowState,
    /// Kernel integral of the terms linear in `(H, S)^(a)`, cut at `min(p, p0)`.
    pub linear: FlowState,
    /// Kernel integral of the self-convolution of `(H, S)^(a)`, cut at `min(p, 2 p0)`.
    pub quadratic: FlowState,
}

impl TailParts {
    pub fn total(&self) -> FlowState {
        let mut out = self.homogeneous.clone();
        out.axpy_unchecked(1.0, &self.linear);
        out.axpy_unchecked(1.0, &self.quadratic);
        out
    }
}

/// Source values of the truncated problem on the quadrature nodes.
struct TailSources {
    /// Nodes of `[0, p0]`.
    a_nodes: Vec<f64>,
    linear: Vec<FlowState>,
    /// Nodes of `[0, 2 p0]`: the `[0, p0]` nodes and their mirror images.
    q_nodes: Vec<f64>,
    quadratic: Vec<FlowState>,
}

fn tail_sources(model: &Model, y0: &FlowState, a_nodes: &[f64], a_samples: &[FlowState]) -> TailSources {
    let n0 = a_nodes.len() - 1;
    let p0 = a_nodes[n0];
    let ya = |s: f64| -> FlowState {
        if s > p0 * (1.0 + 1e-14) {
            model.zero_state()
        } else {
            interpolate_states(a_nodes, a_samples, s.min(p0))
        }
    };
    let linear: Vec<FlowState> = a_samples
        .par_iter()
        .map(|y| {
            let mut r = model.coupling(y);
            r.axpy_unchecked(1.0, &model.nonlinear(y0, y));
            r.axpy_unchecked(1.0, &model.nonlinear(y, y0));
            r
        })
        .collect();
    let mut q_nodes = a_nodes.to_vec();
    q_nodes.extend((0..n0).rev().map(|i| 2.0 * p0 - a_nodes[i]));
    let quadratic = q_nodes
        .par_iter()
        .map(|&q| {
            // s runs over [max(0, q - p0), min(q, p0)]
            let lo = (q - p0).max(0.0);
            let hi = q.min(p0);
            let mut s_pts = vec![lo];
            s_pts.extend(a_nodes.iter().copied().filter(|&s| s > lo && s < hi));
            if hi > lo {
                s_pts.push(hi);
            }
            let mut acc = model.zero_state();
            for k in 0..s_pts.len().saturating_sub(1) {
                let h = 0.5 * (s_pts[k + 1] - s_pts[k]);
                for s in [s_pts[k], s_pts[k + 1]] {
                    acc.axpy_unchecked(h, &model.nonlinear(&ya(s), &ya(q - s)));
                }
            }
            acc
        })
        .collect();
    TailSources { a_nodes: a_nodes.to_vec(), linear, q_nodes, quadratic }
}

/// `int_0^{min(p, end)} H(p, q) F(q) dq` by the trapezoid rule on the nodes
/// of `F`, closing the last panel at `p` where the kernel vanishes.
fn kernel_integral(model: &Model, p: f64, nodes: &[f64], values: &[FlowState], end: f64) -> FlowState {
    let mut out = model.zero_state();
    let upper = p.min(end);
    // (position, value index); None marks the zero-kernel endpoint at p
    let mut pts: Vec<(f64, Option<usize>)> =
        nodes.iter().enumerate().filter(|&(_, &q)| q < upper).map(|(i, &q)| (q, Some(i))).collect();
    if upper < p {
        if let Some(i) = nodes.iter().position(|&q| q == upper) {
            pts.push((upper, Some(i)));
        }
    } else {
        pts.push((p, None));
    }
    if pts.len() < 2 {
        return out;
    }
    let lat = *model.lattice();
    let (shells, class) = lat.shell_classes();
    let b2 = lat.base() * lat.base();
    let diff = model.diffusivities();
    let mut w = vec![0.0; pts.len()];
    for k in 0..pts.len() - 1 {
        let h = 0.5 * (pts[k + 1].0 - pts[k].0);
        w[k] += h;
        w[k + 1] += h;
    }
    for (f, field) in out.fields_mut().into_iter().enumerate() {
        let nc = field.ncomp();
        let data = field.data_mut();
        for (k, &(q, vi)) in pts.iter().enumerate() {
            let Some(vi) = vi else { continue };
            let src = values[vi].fields()[f].data();
            let hk: Vec<f64> = shells
                .iter()
                .map(|&n2| kernel_h(p, q, diff[f] * b2 * n2 as f64).expect("q <= p"))
                .collect();
            for (idx, &cls) in class.iter().enumerate() {
                let c = w[k] * hk[cls];
                if c == 0.0 {
                    continue;
                }
                for j in 0..nc {
                    data[idx * nc + j] += src[idx * nc + j] * c;
                }
            }
        }
    }
    out
}

fn heat_applied(model: &Model, y1: &FlowState, p: f64) -> FlowState {
    let lat = *model.lattice();
    let diff = model.diffusivities();
    let mut out = y1.clone();
    for (f, field) in out.fields_mut().into_iter().enumerate() {
        let nc = field.ncomp();
        let data = field.data_mut();
        for idx in 0..lat.len() {
            let phi = two_j1_over_z(2.0 * (diff[f] * lat.k_squared(idx) * p).sqrt());
            for j in 0..nc {
                data[idx * nc + j] *= phi;
            }
        }
    }
    out
}

fn tail_parts_at(model: &Model, y1: &FlowState, src: &TailSources, p: f64) -> TailParts {
    let p0 = *src.a_nodes.last().expect("nonempty");
    TailParts {
        homogeneous: heat_applied(model, y1, p),
        linear: kernel_integral(model, p, &src.a_nodes, &src.linear, p0),
        quadratic: kernel_integral(model, p, &src.q_nodes, &src.quadratic, 2.0 * p0),
    }
}

/// `(H, S)^(s)` at each of `out_nodes`, from the solution restricted to `[0, p0]`.
///
/// `p0` must be a node of the solution grid.
pub fn truncated_tail_functions(sol: &BorelSolution, p0: f64, out_nodes: &[f64]) -> Result<Vec<TailParts>> {
    let n0 = sol.grid().node_index(p0).ok_or(Error::NotOnGrid { p0 })?;
    if n0 == 0 {
        return Err(Error::InvalidParameter("p0 must be positive".into()));
    }
    Ok(tail_functions_from_parts(
        sol.model(),
        sol.data(),
        sol.sample(0),
        &sol.nodes()[..=n0],
        &sol.samples()[..=n0],
        out_nodes,
    ))
}

fn tail_functions_from_parts(
    model: &Model,
    y0: &FlowState,
    y1: &FlowState,
    a_nodes: &[f64],
    a_samples: &[FlowState],
    out_nodes: &[f64],
) -> Vec<TailParts> {
    let src = tail_sources(model, y0, a_nodes, a_samples);
    out_nodes.par_iter().map(|&p| tail_parts_at(model, y1, &src, p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BConstants {
    pub b1: f64,
    /// `int_0^{p0} e^{-omega0 p} B2(p) dp`.
    pub b2_integral: f64,
    pub b3: f64,
    pub b4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovedEstimateReport {
    pub p0: f64,
    pub omega0: f64,
    pub b: f64,
    pub epsilon1: f64,
    pub b_consts: BConstants,
    pub omega_star: f64,
    pub omega_final: f64,
    pub existence_time: f64,
}

/// Number of uniform panels on `[p0, p_tail]` for the `b` integral.
const TAIL_PANELS: usize = 400;

/// Improved growth rate from the solution on `[0, p0]`.
///
/// `B0(k)` uses the global sup of `|G(z, z')/z|` (times `M3` for MHD) and the
/// sups over `k` run over the lattice; the `b` integral is carried to where
/// the damped integrand drops below `1e-12` of its peak and closed with a
/// geometric tail from the decay over the last two tenths of the range.
pub fn improved_existence(
    sol: &BorelSolution,
    p0: f64,
    omega0: f64,
    constants: &ConstantsBundle,
    table: &KernelTable,
    nparams: &NormParams,
) -> Result<ImprovedEstimateReport> {
    if !(omega0 >= 0.0 && omega0.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega0 must be nonnegative, got {omega0}")));
    }
    let n0 = sol.grid().node_index(p0).ok_or(Error::NotOnGrid { p0 })?;
    if n0 == 0 {
        return Err(Error::InvalidParameter("p0 must be positive".into()));
    }
    let model = sol.model();
    let lat = model.lattice();
    let params = model.params();
    let kmax = lat.max_wavenumber();
    let b0 = match sol.problem() {
        Problem::Boussinesq => constants.c0 * table.sup_g_over_z,
        Problem::Mhd => constants.c0 * table.sup_g_over_z * constants.m3,
    };
    let a = if sol.problem() == Problem::Boussinesq { params.buoyancy_a } else { 0.0 };
    let b1 = 2.0 * kmax * b0 * field_norm(sol.data(), nparams);
    let b3 = kmax * b0;
    let b4 = a * b0;
    let nodes = &sol.nodes()[..=n0];
    let damped: Vec<f64> = nodes
        .iter()
        .zip(&sol.samples()[..=n0])
        .map(|(&p, y)| (-omega0 * p).exp() * 2.0 * kmax * b0 * field_norm(y, nparams))
        .collect();
    let b2_integral: f64 = (0..n0).map(|i| 0.5 * (nodes[i + 1] - nodes[i]) * (damped[i] + damped[i + 1])).sum();
    let epsilon1 = b1 + b4 + b2_integral;
    let b = if omega0 == 0.0 { 0.0 } else { tail_integral(sol, p0, omega0, nparams)? };
    let omega_star = epsilon1 + 2.0 * (b3 * b).sqrt();
    let omega_final = (omega0.max(omega_star) * MARGIN).max(OMEGA_FLOOR);
    let disc = (epsilon1 - omega_final).powi(2) - 4.0 * b3 * b;
    if !(omega_final > epsilon1 && disc > 0.0) {
        return Err(Error::Discriminant { omega: omega_final, epsilon1, b3b: b3 * b });
    }
    Ok(ImprovedEstimateReport {
        p0,
        omega0,
        b,
        epsilon1,
        b_consts: BConstants { b1, b2_integral, b3, b4 },
        omega_star,
        omega_final,
        existence_time: 1.0 / omega_final,
    })
}

/// `omega0 int_{p0}^inf e^{-omega0 p} ||(H, S)^(s)|| dp`.
fn tail_integral(sol: &BorelSolution, p0: f64, omega0: f64, nparams: &NormParams) -> Result<f64> {
    let p_tail = p0 + (1e12f64).ln() / omega0;
    let mut out: Vec<f64> =
        (0..=TAIL_PANELS).map(|i| p0 + (p_tail - p0) * i as f64 / TAIL_PANELS as f64).collect();
    let kink = 2.0 * p0;
    if kink < p_tail && !out.iter().any(|&q| (q - kink).abs() < 1e-12 * kink) {
        let at = out.partition_point(|&q| q < kink);
        out.insert(at, kink);
    }
    let parts = truncated_tail_functions(sol, p0, &out)?;
    let vals: Vec<f64> =
        out.iter().zip(&parts).map(|(&p, t)| (-omega0 * p).exp() * field_norm(&t.total(), nparams)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite tail function".into()));
    }
    let mut integral: f64 =
        (0..out.len() - 1).map(|i| 0.5 * (out[i + 1] - out[i]) * (vals[i] + vals[i + 1])).sum();
    // geometric closure: fit the decay rate of the running max over the last two tenths
    let m = out.len();
    let (i1, i2) = (m - 1 - m / 5, m - 1);
    let env = |i: usize| vals[i..].iter().copied().fold(0.0, f64::max);
    let (e1, e2) = (env(i1), env(i2).max(vals[i2]));
    if e2 > 0.0 && e1 > e2 {
        let rate = (e1 / e2).ln() / (out[i2] - out[i1]);
        integral += e2 / rate;
    } else {
        integral += vals[i2] / omega0;
    }
    Ok(omega0 * integral)
}

/// Best improved estimate over `omega0 in {omega/8, omega/4, omega/2}`, with all three reports.
pub fn improved_existence_scan(
    sol: &BorelSolution,
    p0: f64,
    apriori_omega: f64,
    constants: &ConstantsBundle,
    table: &KernelTable,
    nparams: &NormParams,
) -> Result<(ImprovedEstimateReport, Vec<ImprovedEstimateReport>)> {
    let reports: Vec<ImprovedEstimateReport> = [8.0, 4.0, 2.0]
        .par_iter()
        .map(|&d| improved_existence(sol, p0, apriori_omega / d, constants, table, nparams))
        .collect::<Result<_>>()?;
    let best = *reports
        .iter()
        .min_by(|a, b| a.omega_final.total_cmp(&b.omega_final))
        .expect("three reports");
    Ok((best, reports))
}

/// `e^{-omega p} ||Y(p)||` on the solution grid.
pub fn damped_norm_profile(sol: &BorelSolution, omega: f64, nparams: &NormParams) -> Vec<f64> {
    sol.nodes().iter().zip(sol.samples()).map(|(&p, y)| (-omega * p).exp() * field_norm(y, nparams)).collect()
}

/// True when the largest damped norm over the last tenth of the grid is below
/// the largest over the tenth before it.
pub fn damped_norm_decays(profile: &[f64]) -> bool {
    let m = profile.len();
    let tenth = (m / 10).max(1);
    if m < 2 * tenth + 1 {
        return false;
    }
    let max = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let last = max(&profile[m - tenth..]);
    let before = max(&profile[m - 2 * tenth..m - tenth]);
    last.is_finite() && last < before
}
