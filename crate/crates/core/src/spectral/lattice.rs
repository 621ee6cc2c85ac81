use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of both model problems.
///
/// `mu_thermal` is the Boussinesq thermal diffusivity; `mu_mag`, `sigma`, `rho`
/// are the MHD permeability, conductivity and density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalParams {
    pub nu: f64,
    pub mu_thermal: f64,
    pub buoyancy_a: f64,
    pub mu_mag: f64,
    pub sigma: f64,
    pub rho: f64,
    pub dim: usize,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { nu: 1.0, mu_thermal: 1.0, buoyancy_a: 0.0, mu_mag: 1.0, sigma: 1.0, rho: 1.0, dim: 2 }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nu", self.nu),
            ("mu_thermal", self.mu_thermal),
            ("mu_mag", self.mu_mag),
            ("sigma", self.sigma),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.buoyancy_a.is_finite() && self.buoyancy_a >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "buoyancy_a must be nonnegative, got {}",
                self.buoyancy_a
            )));
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidParameter(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        Ok(())
    }

    /// Magnetic diffusivity 1/(mu sigma).
    pub fn magnetic_diffusivity(&self) -> f64 {
        1.0 / (self.mu_mag * self.sigma)
    }

    /// Lorentz-force coupling 1/(mu rho).
    pub fn lorentz_coupling(&self) -> f64 {
        1.0 / (self.mu_mag * self.rho)
    }

    pub fn m1(&self) -> f64 {
        self.nu.max(self.mu_thermal)
    }

    pub fn m2(&self) -> f64 {
        self.nu.max(self.magnetic_diffusivity())
    }

    pub fn m3(&self) -> f64 {
        1.0f64.max(self.lorentz_coupling())
    }
}

/// Box of wavevectors `base * n` with every `|n_i| <= cutoff`.
///
/// Storage is dense and row-major in `(n_0, n_1[, n_2])`, so the mode `-n`
/// sits at `len - 1 - index(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeLattice {
    base: f64,
    cutoff: usize,
    dim: usize,
}

impl ModeLattice {
    pub fn new(base: f64, cutoff: usize, dim: usize) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::InvalidParameter(format!("lattice base must be positive, got {base}")));
        }
        if cutoff == 0 {
            return Err(Error::InvalidParameter("lattice cutoff must be at least 1".into()));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("lattice dim must be 2 or 3, got {dim}")));
        }
        Ok(Self { base, cutoff, dim })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub(crate) fn strides(&self) -> [usize; 3] {
        let s = self.side();
        if self.dim == 3 {
            [s * s, s, 1]
        } else {
            [s, 1, 0]
        }
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        if n.len() != self.dim {
            return None;
        }
        let k = self.cutoff as i64;
        let strides = self.strides();
        let mut idx = 0usize;
        for (d, &nd) in n.iter().enumerate() {
            if nd.abs() > k {
                return None;
            }
            idx += (nd + k) as usize * strides[d];
        }
        Some(idx)
    }

    /// Integer coordinates of a mode; the unused third slot is 0 in 2-D.
    pub fn multi_index(&self, idx: usize) -> [i64; 3] {
        let s = self.side();
        let k = self.cutoff as i64;
        let mut out = [0i64; 3];
        let mut rem = idx;
        for d in (0..self.dim).rev() {
            out[d] = (rem % s) as i64 - k;
            rem /= s;
        }
        out
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let n = self.multi_index(idx);
        [self.base * n[0] as f64, self.base * n[1] as f64, self.base * n[2] as f64]
    }

    pub fn n_squared(&self, idx: usize) -> i64 {
        let n = self.multi_index(idx);
        n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        self.base * self.base * self.n_squared(idx) as f64
    }

    pub fn k_norm(&self, idx: usize) -> f64 {
        self.k_squared(idx).sqrt()
    }

    pub fn negate(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Largest |k| present on the lattice (a box corner).
    pub fn max_wavenumber(&self) -> f64 {
        self.base * self.cutoff as f64 * (self.dim as f64).sqrt()
    }

    /// Distinct values of |n|^2, sorted, and the class of every mode.
    pub(crate) fn shell_classes(&self) -> (Vec<i64>, Vec<usize>) {
        let mut shells: Vec<i64> = (0..self.len()).map(|i| self.n_squared(i)).collect();
        shells.sort_unstable();
        shells.dedup();
        let class = (0..self.len())
            .map(|i| shells.binary_search(&self.n_squared(i)).expect("shell present"))
            .collect();
        (shells, class)
    }
}
