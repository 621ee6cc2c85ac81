//! JSON run configuration.

use std::path::{Path, PathBuf};

use borel_flow::norms::{NormKind, NormParams};
use borel_flow::{Complex64, FieldKind, FlowState, ModeLattice, PhysicalParams, Problem, SpectralField};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub base: f64,
    pub cutoff: usize,
    pub dim: usize,
}

/// One Fourier mode: integer multiples of the base and a `[re, im]` pair per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub amp: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    /// Velocity modes.
    pub primary: Vec<ModeSpec>,
    /// Temperature (Boussinesq) or magnetic-field (MHD) modes.
    pub companion: Vec<ModeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    pub kind: NormKind,
    pub gamma: f64,
    pub beta: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { kind: NormKind::L1Linf, gamma: 3.0, beta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub p_max: f64,
    pub n: usize,
    pub grading: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { p_max: 2.0, n: 128, grading: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted series truncation when seeding the march.
    pub seed_tol: f64,
    /// Refinement factor of the integral-equation residual check.
    pub residual_refinement: usize,
    /// Runge-Kutta step.
    pub rk4_dt: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { seed_tol: 1e-12, residual_refinement: 2, rk4_dt: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub params: PhysicalParams,
    pub lattice: LatticeConfig,
    pub initial: InitialData,
    pub forcing: Vec<ModeSpec>,
    pub norm: NormConfig,
    /// Taylor order of the series (also the march seed order).
    pub order: usize,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    /// Reconstruction times; empty means five equally spaced times in `(0, 0.5/omega]`.
    pub times: Vec<f64>,
    /// Grid node used as `p0` by the improved estimate; defaults to the middle node.
    pub p0_node: Option<usize>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    /// Heat-equation shear `cos(x2) e1` with `nu = 1` on a small 2-D lattice.
    fn default() -> Self {
        Self {
            problem: Problem::Boussinesq,
            params: PhysicalParams::default(),
            lattice: LatticeConfig { base: 1.0, cutoff: 2, dim: 2 },
            initial: InitialData {
                primary: vec![ModeSpec { k: vec![0, 1], amp: vec![[0.5, 0.0], [0.0, 0.0]] }],
                companion: Vec::new(),
            },
            forcing: Vec::new(),
            norm: NormConfig::default(),
            order: 20,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            times: Vec::new(),
            p0_node: None,
            output: OutputConfig::default(),
        }
    }
}

/// Validated, assembled inputs of a run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub lattice: ModeLattice,
    pub data: FlowState,
    pub forcing: SpectralField,
    pub nparams: NormParams,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn assemble(&self) -> Result<Inputs, CliError> {
        let mut params = self.params;
        params.dim = self.lattice.dim;
        params.validate().map_err(|e| field_error("params", e))?;
        let lattice = ModeLattice::new(self.lattice.base, self.lattice.cutoff, self.lattice.dim)
            .map_err(|e| field_error("lattice", e))?;
        let primary = build_field(lattice, FieldKind::Vector, &self.initial.primary, "initial.primary")?;
        let companion =
            build_field(lattice, self.problem.companion_kind(), &self.initial.companion, "initial.companion")?;
        let forcing = build_field(lattice, FieldKind::Vector, &self.forcing, "forcing")?;
        let data = FlowState::new(self.problem, primary, companion).map_err(|e| field_error("initial", e))?;
        let nparams = NormParams { kind: self.norm.kind, gamma: self.norm.gamma, beta: self.norm.beta, dim: self.lattice.dim };
        nparams.validate().map_err(|e| field_error("norm", e))?;
        if self.grid.n < 2 {
            return Err(field_error("grid.n", "need at least two intervals"));
        }
        if self.tolerances.residual_refinement == 0 {
            return Err(field_error("tolerances.residual_refinement", "must be at least 1"));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.tolerances.rk4_dt) || !positive(self.tolerances.seed_tol) {
            return Err(field_error("tolerances", "rk4_dt and seed_tol must be positive"));
        }
        if let Some(n0) = self.p0_node {
            if n0 == 0 || n0 > self.grid.n {
                return Err(field_error("p0_node", format!("must lie in 1..={}", self.grid.n)));
            }
        }
        if self.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field_error("times", "must be positive and increasing"));
        }
        Ok(Inputs { lattice, data, forcing, nparams })
    }

    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams { dim: self.lattice.dim, ..self.params }
    }
}

/// Fills a field from a mode list; a mode whose negative is not listed gets
/// its conjugate synthesized, and listed pairs must agree.
fn build_field(lat: ModeLattice, kind: FieldKind, modes: &[ModeSpec], what: &str) -> Result<SpectralField, CliError> {
    let mut f = SpectralField::zeros(lat, kind);
    let nc = f.ncomp();
    let amps: Vec<Vec<Complex64>> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.k.len() != lat.dim() {
                return Err(field_error(&format!("{what}[{i}].k"), format!("expected {} entries", lat.dim())));
            }
            if m.amp.len() != nc {
                return Err(field_error(&format!("{what}[{i}].amp"), format!("expected {nc} components")));
            }
            if lat.index_of(&m.k).is_none() {
                return Err(field_error(&format!("{what}[{i}].k"), "outside the lattice"));
            }
            Ok(m.amp.iter().map(|a| Complex64::new(a[0], a[1])).collect())
        })
        .collect::<Result<_, _>>()?;
    for (i, m) in modes.iter().enumerate() {
        let neg: Vec<i64> = m.k.iter().map(|v| -v).collect();
        match modes.iter().position(|o| o.k == neg) {
            Some(j) => {
                let consistent = amps[i].iter().zip(&amps[j]).all(|(a, b)| (a - b.conj()).norm() <= 1e-14 * a.norm().max(1.0));
                if !consistent {
                    return Err(field_error(&format!("{what}[{i}]"), "amplitude is not the conjugate of the listed -k mode"));
                }
                f.set_mode(&m.k, &amps[i]).map_err(|e| field_error(&format!("{what}[{i}]"), e))?;
            }
            None => f.set_mode_with_conjugate(&m.k, &amps[i]).map_err(|e| field_error(&format!("{what}[{i}]"), e))?,
        }
    }
    if kind == FieldKind::Vector {
        f.check_divergence_free(1e-12).map_err(|e| field_error(what, e))?;
    }
    Ok(f)
}
