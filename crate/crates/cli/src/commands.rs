//! The subcommands. Each writes its artifacts into the output directory and a
//! one-line summary to stdout.

use std::path::{Path, PathBuf};

use borel_flow::bessel::{kernel_ode_residual, laplace_identity_value, two_j1_over_z, wronskian_value, KernelTable};
use borel_flow::estimates::{
    apriori_growth, damped_norm_decays, damped_norm_profile, improved_existence_scan, series_bound_constants,
    DataNorms, GrowthEstimate, ImprovedEstimateReport, SeriesBounds,
};
use borel_flow::march::{build_grid, march, residual_integral_eq, BorelSolution};
use borel_flow::norms::{c0_constant, field_norm, kernel_constants, weighted_convolution_lhs, weighted_convolution_rhs, m0_constant, ConstantsBundle};
use borel_flow::reconstruct::{galerkin_rk4_at, laplace_trajectory};
use borel_flow::taylor::{borel_series, majorant_sequence, radius_estimate, support_radius, RadiusEstimate};
use borel_flow::{convolve, Error, FlowState, Model};
use serde::Serialize;

use crate::config::{Inputs, RunConfig};
use crate::io::{read_states_csv, write_json, write_states_csv};
use crate::{CliError, Command};

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub compare_oracle: bool,
}

/// Model, inputs and the norm constants shared by every command.
pub struct Setup {
    pub cfg: RunConfig,
    pub inputs: Inputs,
    pub model: Model,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let inputs = cfg.assemble()?;
        let model = Model::new(cfg.problem, cfg.physical(), inputs.lattice)?;
        Ok(Self { cfg: cfg.clone(), inputs, model })
    }

    fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = &self.cfg.output.dir;
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(dir.join(name))
    }

    pub fn constants(&self) -> Result<ConstantsBundle, CliError> {
        Ok(kernel_constants(&self.cfg.physical(), &self.inputs.nparams, KernelTable::global())?)
    }

    pub fn first_coeff(&self) -> FlowState {
        self.model.rhs(&self.inputs.data, &self.inputs.forcing)
    }

    pub fn growth(&self) -> Result<(DataNorms, GrowthEstimate), CliError> {
        let norms = DataNorms::of(&self.inputs.data, &self.first_coeff(), &self.inputs.nparams);
        let g = apriori_growth(self.cfg.problem, &norms, &self.constants()?, &self.cfg.physical(), &self.inputs.nparams)?;
        Ok((norms, g))
    }

    pub fn solve(&self) -> Result<BorelSolution, CliError> {
        let g = &self.cfg.grid;
        let grid = build_grid(g.p_max, g.n, g.grading)?;
        Ok(march(&self.model, &self.inputs.data, &self.inputs.forcing, &grid, self.cfg.order, self.cfg.tolerances.seed_tol)?)
    }

    /// Configured times, or five equally spaced times in `(0, 0.5/omega]`.
    pub fn times(&self, omega: f64) -> Vec<f64> {
        if !self.cfg.times.is_empty() {
            return self.cfg.times.clone();
        }
        (1..=5).map(|i| 0.5 / omega * i as f64 / 5.0).collect()
    }
}

pub fn dispatch(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<(), CliError> {
    let s = Setup::new(cfg)?;
    match cmd {
        Command::Series => series(&s),
        Command::March => march_cmd(&s),
        Command::Reconstruct => reconstruct(&s, opts),
        Command::Estimate => estimate(&s),
        Command::Verify => verify(&s),
        Command::Oracle => oracle(&s),
    }
}

#[derive(Debug, Serialize)]
pub struct SeriesReport {
    pub order: usize,
    pub coefficient_norms: Vec<f64>,
    /// `None` below order 8.
    pub radius: Option<RadiusEstimate>,
    pub majorant_radius_bound: f64,
}

fn series(s: &Setup) -> Result<(), CliError> {
    let order = s.cfg.order;
    let ser = borel_series(&s.model, &s.inputs.data, &s.inputs.forcing, order)?;
    let np = &s.inputs.nparams;
    let ls: Vec<f64> = (0..=order).map(|l| l as f64).collect();
    write_states_csv(&s.out_path("coefficients.csv")?, "l", &ls, ser.coeffs())?;
    let radius = if order >= 8 { Some(radius_estimate(&ser, np)?) } else { None };
    let k1 = support_radius(&s.inputs.data, &s.inputs.forcing).max(s.inputs.lattice.base());
    let maj = majorant_sequence(field_norm(&s.inputs.data, np), &[], k1, c0_constant(np)?, &s.cfg.physical(), 0)?;
    let report = SeriesReport {
        order,
        coefficient_norms: ser.coeffs().iter().map(|c| field_norm(c, np)).collect(),
        radius,
        majorant_radius_bound: maj.radius_bound,
    };
    write_json(&s.out_path("series.json")?, &report)?;
    match radius {
        Some(r) => println!("series: order {order}, radius {:e}", r.radius()),
        None => println!("series: order {order}"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MarchReport {
    pub nodes: usize,
    pub p_max: f64,
    pub grading: f64,
    pub seed_order: usize,
    pub seeded_nodes: usize,
    pub residual: f64,
    pub residual_refinement: usize,
}

fn march_cmd(s: &Setup) -> Result<(), CliError> {
    let sol = s.solve()?;
    let refinement = s.cfg.tolerances.residual_refinement;
    let residual = residual_integral_eq(&sol, refinement)?;
    write_states_csv(&s.out_path("borel_solution.csv")?, "p", sol.nodes(), sol.samples())?;
    let report = MarchReport {
        nodes: sol.grid().len(),
        p_max: sol.grid().p_max(),
        grading: sol.grid().grading(),
        seed_order: sol.seed_order(),
        seeded_nodes: sol.seeded_nodes(),
        residual,
        residual_refinement: refinement,
    };
    write_json(&s.out_path("march.json")?, &report)?;
    println!("march: {} nodes, {} seeded, residual {residual:e}", report.nodes, report.seeded_nodes);
    Ok(())
}

/// Rebuilds a solution from an exported `borel_solution.csv` and the config
/// it came from, and returns its integral-equation residual.
pub fn reimported_residual(cfg: &RunConfig, table: &Path) -> Result<f64, CliError> {
    let s = Setup::new(cfg)?;
    let (nodes, samples) = read_states_csv(table, &s.model)?;
    let grid = borel_flow::march::BorelGrid::from_nodes(nodes)?;
    let sol = BorelSolution::from_parts(
        s.model.clone(),
        s.inputs.data.clone(),
        s.inputs.forcing.clone(),
        grid,
        samples,
        cfg.order,
        0,
    )?;
    Ok(residual_integral_eq(&sol, cfg.tolerances.residual_refinement)?)
}

#[derive(Debug, Serialize)]
pub struct ReconstructReport {
    pub omega: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Largest amplitude difference from the RK4 oracle, when requested.
    pub max_deviation: Option<f64>,
    pub rk4_dt: Option<f64>,
}

fn reconstruct(s: &Setup, opts: &Options) -> Result<(), CliError> {
    let (_, g) = s.growth()?;
    let times = s.times(g.omega);
    let sol = s.solve()?;
    let traj = laplace_trajectory(&sol, &times, g.omega)?;
    write_states_csv(&s.out_path("trajectory.csv")?, "t", &traj.times, &traj.states)?;
    let (max_deviation, rk4_dt) = if opts.compare_oracle {
        let dt = s.cfg.tolerances.rk4_dt;
        let rk = galerkin_rk4_at(&s.model, &s.inputs.data, &s.inputs.forcing, &times, dt)?;
        let mut dev = 0.0f64;
        for (a, b) in traj.states.iter().zip(&rk.states) {
            dev = dev.max(a.max_abs_diff(b)?);
        }
        (Some(dev), Some(dt))
    } else {
        (None, None)
    };
    let report = ReconstructReport {
        omega: g.omega,
        norms: traj.states.iter().map(|y| field_norm(y, &s.inputs.nparams)).collect(),
        times,
        max_deviation,
        rk4_dt,
    };
    write_json(&s.out_path("reconstruct.json")?, &report)?;
    match max_deviation {
        Some(d) => println!("reconstruct: {} times, max deviation from RK4 {d:e}", report.times.len()),
        None => println!("reconstruct: {} times", report.times.len()),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub data_norms: DataNorms,
    pub growth: GrowthEstimate,
    /// `None` when the norm has no analytic weight (`beta = 0` or `l1_linf`).
    pub series_bounds: Option<SeriesBounds>,
    pub improved: ImprovedEstimateReport,
    pub improved_scan: Vec<ImprovedEstimateReport>,
    /// Whether `e^{-omega p} ||Y(p)||` at the improved rate decreases over the last tenth of the grid.
    pub damped_norm_decays: bool,
}

fn estimate(s: &Setup) -> Result<(), CliError> {
    let constants = s.constants()?;
    let (norms, growth) = s.growth()?;
    let np = &s.inputs.nparams;
    let series_bounds = match series_bound_constants(s.cfg.problem, &norms, &constants, &s.cfg.physical(), np) {
        Ok(b) => Some(b),
        Err(Error::BetaZero) => None,
        Err(e) => return Err(e.into()),
    };
    let sol = s.solve()?;
    let p0 = sol.nodes()[s.cfg.p0_node.unwrap_or(sol.grid().len() / 2)];
    let (improved, improved_scan) =
        improved_existence_scan(&sol, p0, growth.omega, &constants, KernelTable::global(), np)?;
    let decays = damped_norm_decays(&damped_norm_profile(&sol, improved.omega_final, np));
    let report = EstimateReport { data_norms: norms, growth, series_bounds, improved, improved_scan, damped_norm_decays: decays };
    write_json(&s.out_path("estimate.json")?, &report)?;
    println!("estimate: a-priori omega {:e}, improved omega {:e}", growth.omega, improved.omega_final);
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: impl Into<String>, err: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value: err, tolerance, pass: err <= tolerance }
    }

    fn in_range(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, tolerance: hi - lo, pass: (lo..=hi).contains(&value) }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Deterministic quasi-random point in the unit square (golden-ratio sequence).
fn quasi(i: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    let f = |a: f64| (0.5 + a * (i + 1) as f64).fract();
    (f(A1), f(A2))
}

pub fn verify_checks(s: &Setup) -> Result<Vec<Check>, CliError> {
    let table = KernelTable::global();
    let mut checks = vec![
        Check::in_range("sup_G", table.sup_g, 0.55, 0.65),
        Check::in_range("M0", m0_constant(), 3.7, 3.8),
    ];
    let sup_j1 = (0..=20_000).map(|i| 0.5 * two_j1_over_z(i as f64 * 1e-3)).fold(0.0, f64::max);
    checks.push(Check::within("sup_J1_over_z_minus_half", (sup_j1 - 0.5).abs(), 1e-10));
    let wr = [0.5, 2.0, 7.0, 20.0]
        .iter()
        .map(|&z: &f64| (wronskian_value(z) * z - std::f64::consts::FRAC_2_PI).abs())
        .fold(0.0, f64::max);
    checks.push(Check::within("wronskian", wr, 1e-8));
    let ode = (0..50)
        .map(|i| {
            let (a, b) = quasi(i);
            let (_, c) = quasi(i + 50);
            let p = 0.5 + 9.5 * a;
            kernel_ode_residual(p, p * b * 0.9, 0.1 + 9.9 * c, 1e-3)
        })
        .fold(0.0, f64::max);
    checks.push(Check::within("kernel_ode_residual", ode, 1e-5));
    for (l, t) in [(1.0f64, 0.1f64), (4.0, 0.05)] {
        let want = (1.0 - (-l * t).exp()) / l;
        checks.push(Check::within(format!("laplace_identity_l{l}_t{t}"), (laplace_identity_value(l, t) - want).abs(), 1e-8));
    }
    let mut worst_conv = f64::NEG_INFINITY;
    for q in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for (m, n) in [(-1, -1), (0, 0), (1, 0), (1, 2)] {
            worst_conv = worst_conv.max(weighted_convolution_lhs(q, m, n, 2)? / weighted_convolution_rhs(q, m, n, 2)?);
        }
    }
    checks.push(Check::within("convolution_bound_ratio", worst_conv, 1.0));

    // the configured data under the configured norm
    let np = &s.inputs.nparams;
    let data = &s.inputs.data;
    checks.push(Check::within("data_conjugate_symmetry", data.conjugate_symmetry_defect(), 1e-14));
    checks.push(Check::within("data_divergence", data.divergence_defect(), 1e-12));
    let c0 = c0_constant(np)?;
    let u = data.primary();
    let mut sub = 0.0f64;
    for j in 0..u.ncomp() {
        let uj = u.component(j)?;
        let lhs = field_norm(&convolve(&uj, &uj)?, np);
        let rhs = c0 * field_norm(&uj, np).powi(2);
        sub = sub.max(lhs - rhs);
    }
    checks.push(Check::within("subalgebra_excess", sub, 0.0));
    let proj = field_norm(&u.projected(), np) - field_norm(u, np);
    checks.push(Check::within("projection_excess", proj, 1e-14 * field_norm(u, np).max(1.0)));
    let hom = (field_norm(&data.scaled(-2.5), np) - 2.5 * field_norm(data, np)).abs();
    checks.push(Check::within("homogeneity", hom, 1e-13 * field_norm(data, np).max(1.0)));
    Ok(checks)
}

fn verify(s: &Setup) -> Result<(), CliError> {
    let checks = verify_checks(s)?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    let report = VerifyReport { all_pass: failed.is_empty(), checks };
    write_json(&s.out_path("verify.json")?, &report)?;
    println!("verify: {} checks, {} failed", report.checks.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub rk4_dt: f64,
}

fn oracle(s: &Setup) -> Result<(), CliError> {
    let times = if s.cfg.times.is_empty() { s.times(s.growth()?.1.omega) } else { s.cfg.times.clone() };
    let dt = s.cfg.tolerances.rk4_dt;
    let traj = galerkin_rk4_at(&s.model, &s.inputs.data, &s.inputs.forcing, &times, dt)?;
    write_states_csv(&s.out_path("trajectory.csv")?, "t", &traj.times, &traj.states)?;
    let report = OracleReport {
        norms: traj.states.iter().map(|y| field_norm(y, &s.inputs.nparams)).collect(),
        times: traj.times.clone(),
        rk4_dt: dt,
    };
    write_json(&s.out_path("oracle.json")?, &report)?;
    println!("oracle: {} times", report.times.len());
    Ok(())
}
