use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::ModeLattice;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Below this many modes a convolution runs on the calling thread.
const PAR_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Vector,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Boussinesq,
    Mhd,
}

impl Problem {
    pub fn companion_kind(self) -> FieldKind {
        match self {
            Problem::Boussinesq => FieldKind::Scalar,
            Problem::Mhd => FieldKind::Vector,
        }
    }
}

/// `v - k (k.v) / |k|^2`.
pub fn hodge_project(k: &[f64], v: &[Complex64]) -> Result<Vec<Complex64>> {
    if k.len() != v.len() {
        return Err(Error::KindMismatch(format!(
            "wavevector has {} components, vector has {}",
            k.len(),
            v.len()
        )));
    }
    let ksq: f64 = k.iter().map(|x| x * x).sum();
    if ksq == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let mut out = v.to_vec();
    project_in_place(k, ksq, &mut out);
    Ok(out)
}

#[inline]
fn project_in_place(k: &[f64], ksq: f64, v: &mut [Complex64]) {
    let dot: Complex64 = k.iter().zip(v.iter()).map(|(kk, vv)| vv * kk).sum();
    let s = dot / ksq;
    for (vv, kk) in v.iter_mut().zip(k) {
        *vv -= s * kk;
    }
}

/// Complex amplitudes on every mode of a lattice box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: ModeLattice,
    kind: FieldKind,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: ModeLattice, kind: FieldKind) -> Self {
        let nc = components(kind, &lattice);
        Self { lattice, kind, data: vec![ZERO; lattice.len() * nc] }
    }

    pub fn from_data(lattice: ModeLattice, kind: FieldKind, data: Vec<Complex64>) -> Result<Self> {
        let nc = components(kind, &lattice);
        if data.len() != lattice.len() * nc {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                lattice.len() * nc,
                data.len()
            )));
        }
        Ok(Self { lattice, kind, data })
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn ncomp(&self) -> usize {
        components(self.kind, &self.lattice)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn amplitude(&self, idx: usize) -> &[Complex64] {
        let nc = self.ncomp();
        &self.data[idx * nc..(idx + 1) * nc]
    }

    pub fn amplitude_mut(&mut self, idx: usize) -> &mut [Complex64] {
        let nc = self.ncomp();
        &mut self.data[idx * nc..(idx + 1) * nc]
    }

    /// Sets the amplitude at integer mode `n` (no conjugate added).
    pub fn set_mode(&mut self, n: &[i64], amp: &[Complex64]) -> Result<()> {
        let idx = self.lookup(n)?;
        if amp.len() != self.ncomp() {
            return Err(Error::KindMismatch(format!(
                "mode amplitude has {} components, field needs {}",
                amp.len(),
                self.ncomp()
            )));
        }
        self.amplitude_mut(idx).copy_from_slice(amp);
        Ok(())
    }

    /// Sets `n` to `amp` and `-n` to its conjugate. At `n = 0` the amplitude must be real.
    pub fn set_mode_with_conjugate(&mut self, n: &[i64], amp: &[Complex64]) -> Result<()> {
        let idx = self.lookup(n)?;
        if idx == self.lattice.zero_index() && amp.iter().any(|a| a.im != 0.0) {
            return Err(Error::NotConjugateSymmetric {
                defect: amp.iter().map(|a| a.im.abs()).fold(0.0, f64::max),
            });
        }
        self.set_mode(n, amp)?;
        let conj: Vec<Complex64> = amp.iter().map(|a| a.conj()).collect();
        let neg = self.lattice.negate(idx);
        self.amplitude_mut(neg).copy_from_slice(&conj);
        Ok(())
    }

    fn lookup(&self, n: &[i64]) -> Result<usize> {
        self.lattice.index_of(n).ok_or_else(|| {
            Error::InvalidParameter(format!("mode {n:?} is outside the lattice box"))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| *a == ZERO)
    }

    /// Euclidean magnitude of the amplitude at one mode.
    pub fn mode_magnitude(&self, idx: usize) -> f64 {
        self.amplitude(idx).iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &SpectralField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub(crate) fn axpy_real(&mut self, alpha: f64, other: &SpectralField) {
        debug_assert!(self.check_compatible(other).is_ok());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::KindMismatch("vector and scalar fields mixed".into()));
        }
        Ok(())
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &SpectralField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest `|a(-k) - conj a(k)|` over the lattice.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.lattice.len() {
            let neg = self.lattice.negate(idx);
            for (a, b) in self.amplitude(idx).iter().zip(self.amplitude(neg)) {
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Worst `|k.a(k)| / (|k| |a(k)|)` and the mode where it occurs. A nonzero
    /// amplitude at k = 0 counts as defect 1.
    pub fn divergence_defect(&self) -> (f64, [i64; 3]) {
        if self.kind == FieldKind::Scalar {
            return (0.0, [0; 3]);
        }
        let mut worst = (0.0, [0i64; 3]);
        for idx in 0..self.lattice.len() {
            let mag = self.mode_magnitude(idx);
            if mag == 0.0 {
                continue;
            }
            let defect = if idx == self.lattice.zero_index() {
                1.0
            } else {
                let k = self.lattice.wavevector(idx);
                let dot: Complex64 =
                    self.amplitude(idx).iter().zip(k.iter()).map(|(a, kk)| a * kk).sum();
                dot.norm() / (self.lattice.k_norm(idx) * mag)
            };
            if defect > worst.0 {
                worst = (defect, self.lattice.multi_index(idx));
            }
        }
        worst
    }

    pub fn check_divergence_free(&self, tol: f64) -> Result<()> {
        let (worst, mode) = self.divergence_defect();
        if worst > tol {
            return Err(Error::NotDivergenceFree { worst, mode });
        }
        Ok(())
    }

    /// Hodge projection of every mode; the zero mode is cleared.
    pub fn project(&mut self) {
        if self.kind == FieldKind::Scalar {
            return;
        }
        let lat = self.lattice;
        let dim = lat.dim();
        for idx in 0..lat.len() {
            let amp = self.amplitude_mut(idx);
            if idx == lat.zero_index() {
                amp.fill(ZERO);
                continue;
            }
            let k = lat.wavevector(idx);
            project_in_place(&k[..dim], lat.k_squared(idx), amp);
        }
    }

    pub fn projected(&self) -> Self {
        let mut out = self.clone();
        out.project();
        out
    }

    /// Scalar field holding component `j` of a vector field.
    pub fn component(&self, j: usize) -> Result<SpectralField> {
        if self.kind != FieldKind::Vector || j >= self.ncomp() {
            return Err(Error::KindMismatch(format!("no component {j} in this field")));
        }
        let nc = self.ncomp();
        let data = (0..self.lattice.len()).map(|i| self.data[i * nc + j]).collect();
        Ok(SpectralField { lattice: self.lattice, kind: FieldKind::Scalar, data })
    }
}

fn components(kind: FieldKind, lattice: &ModeLattice) -> usize {
    match kind {
        FieldKind::Vector => lattice.dim(),
        FieldKind::Scalar => 1,
    }
}

/// Truncated lattice convolution `sum_{k'} f(k') g(k - k')`.
///
/// Scalar-scalar gives a scalar; scalar-vector (either order) convolves each
/// vector component with the scalar. Vector-vector products must be formed
/// component by component via [`SpectralField::component`].
pub fn convolve(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.lattice != g.lattice {
        return Err(Error::LatticeMismatch);
    }
    let (s, v) = match (f.kind, g.kind) {
        (FieldKind::Scalar, _) => (f, g),
        (FieldKind::Vector, FieldKind::Scalar) => (g, f),
        (FieldKind::Vector, FieldKind::Vector) => {
            return Err(Error::KindMismatch(
                "vector-vector convolution is ambiguous; select a component".into(),
            ))
        }
    };
    let lat = f.lattice;
    let sources = nonzero_modes(s, |a| a[0] != ZERO);
    let nc = v.ncomp();
    let mut out = SpectralField::zeros(lat, v.kind);
    let kernel = |o: usize, acc: &mut [Complex64]| {
        let n = lat.multi_index(o);
        for src in &sources {
            if let Some(j) = difference_index(&lat, &n, src) {
                let w = s.data[src.idx];
                for (a, x) in acc.iter_mut().zip(&v.data[j * nc..(j + 1) * nc]) {
                    *a += w * x;
                }
            }
        }
    };
    fill_modes(&mut out.data, nc, kernel);
    Ok(out)
}

pub(crate) struct Source {
    pub idx: usize,
    pub n: [i64; 3],
}

pub(crate) fn nonzero_modes(f: &SpectralField, keep: impl Fn(&[Complex64]) -> bool) -> Vec<Source> {
    (0..f.lattice.len())
        .filter(|&i| keep(f.amplitude(i)))
        .map(|i| Source { idx: i, n: f.lattice.multi_index(i) })
        .collect()
}

/// Storage index of `n - src.n` if it stays in the box.
#[inline]
pub(crate) fn difference_index(lat: &ModeLattice, n: &[i64; 3], src: &Source) -> Option<usize> {
    let k = lat.cutoff() as i64;
    let strides = lat.strides();
    let mut idx = 0usize;
    for d in 0..lat.dim() {
        let m = n[d] - src.n[d];
        if m.abs() > k {
            return None;
        }
        idx += (m + k) as usize * strides[d];
    }
    Some(idx)
}

/// Runs `kernel(mode, accumulator)` for every output mode, in parallel for
/// large lattices. Each mode is written by exactly one call, so the result
/// does not depend on scheduling.
pub(crate) fn fill_modes<F>(out: &mut [Complex64], nc: usize, kernel: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let modes = out.len() / nc;
    if modes >= PAR_THRESHOLD {
        out.par_chunks_mut(nc).enumerate().for_each(|(o, acc)| kernel(o, acc));
    } else {
        out.chunks_mut(nc).enumerate().for_each(|(o, acc)| kernel(o, acc));
    }
}

/// `out_b(k) = sum_{k'} (k . a(k')) b(k - k')` for each `b` in `bs`.
///
/// This is the transport part of the quadratic terms: `-i` times the result is
/// the Fourier transform of `a . grad b` for divergence-free `a`.
pub(crate) fn advect_sums(a: &SpectralField, bs: &[&SpectralField]) -> Vec<SpectralField> {
    debug_assert_eq!(a.kind, FieldKind::Vector);
    let lat = a.lattice;
    let dim = lat.dim();
    let sources = nonzero_modes(a, |amp| amp.iter().any(|x| *x != ZERO));
    let ncs: Vec<usize> = bs.iter().map(|b| b.ncomp()).collect();
    let total: usize = ncs.iter().sum();
    let mut packed = vec![ZERO; lat.len() * total];
    let kernel = |o: usize, acc: &mut [Complex64]| {
        let n = lat.multi_index(o);
        let k = [lat.base() * n[0] as f64, lat.base() * n[1] as f64, lat.base() * n[2] as f64];
        for src in &sources {
            let Some(j) = difference_index(&lat, &n, src) else { continue };
            let amp = a.amplitude(src.idx);
            let mut dot = ZERO;
            for d in 0..dim {
                dot += amp[d] * k[d];
            }
            if dot == ZERO {
                continue;
            }
            let mut off = 0;
            for (b, &nc) in bs.iter().zip(&ncs) {
                let bj = &b.data[j * nc..(j + 1) * nc];
                for c in 0..nc {
                    acc[off + c] += dot * bj[c];
                }
                off += nc;
            }
        }
    };
    fill_modes(&mut packed, total, kernel);
    let mut outs: Vec<SpectralField> =
        bs.iter().map(|b| SpectralField::zeros(lat, b.kind)).collect();
    for o in 0..lat.len() {
        let mut off = o * total;
        for (out, &nc) in outs.iter_mut().zip(&ncs) {
            out.data[o * nc..(o + 1) * nc].copy_from_slice(&packed[off..off + nc]);
            off += nc;
        }
    }
    outs
}

/// A velocity-like field paired with its companion (temperature or magnetic field).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    problem: Problem,
    primary: SpectralField,
    companion: SpectralField,
}

impl FlowState {
    pub fn new(problem: Problem, primary: SpectralField, companion: SpectralField) -> Result<Self> {
        if primary.lattice != companion.lattice {
            return Err(Error::LatticeMismatch);
        }
        if primary.kind != FieldKind::Vector {
            return Err(Error::KindMismatch("primary field must be a vector field".into()));
        }
        if companion.kind != problem.companion_kind() {
            return Err(Error::KindMismatch(format!(
                "{problem:?} companion must be a {:?} field",
                problem.companion_kind()
            )));
        }
        Ok(Self { problem, primary, companion })
    }

    pub fn zeros(problem: Problem, lattice: ModeLattice) -> Self {
        Self {
            problem,
            primary: SpectralField::zeros(lattice, FieldKind::Vector),
            companion: SpectralField::zeros(lattice, problem.companion_kind()),
        }
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.primary.lattice
    }

    pub fn primary(&self) -> &SpectralField {
        &self.primary
    }

    pub fn companion(&self) -> &SpectralField {
        &self.companion
    }

    pub fn primary_mut(&mut self) -> &mut SpectralField {
        &mut self.primary
    }

    pub fn companion_mut(&mut self) -> &mut SpectralField {
        &mut self.companion
    }

    pub fn into_parts(self) -> (SpectralField, SpectralField) {
        (self.primary, self.companion)
    }

    pub fn fields(&self) -> [&SpectralField; 2] {
        [&self.primary, &self.companion]
    }

    pub fn fields_mut(&mut self) -> [&mut SpectralField; 2] {
        [&mut self.primary, &mut self.companion]
    }

    pub fn is_zero(&self) -> bool {
        self.primary.is_zero() && self.companion.is_zero()
    }

    /// Euclidean magnitude of the stacked amplitudes at one mode.
    pub fn mode_magnitude(&self, idx: usize) -> f64 {
        let a = self.primary.mode_magnitude(idx);
        let b = self.companion.mode_magnitude(idx);
        (a * a + b * b).sqrt()
    }

    pub fn scale(&mut self, alpha: f64) {
        let a = Complex64::new(alpha, 0.0);
        self.primary.scale(a);
        self.companion.scale(a);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &FlowState) -> Result<()> {
        self.check_compatible(other)?;
        self.primary.axpy_real(alpha, &other.primary);
        self.companion.axpy_real(alpha, &other.companion);
        Ok(())
    }

    pub(crate) fn axpy_unchecked(&mut self, alpha: f64, other: &FlowState) {
        self.primary.axpy_real(alpha, &other.primary);
        self.companion.axpy_real(alpha, &other.companion);
    }

    pub fn check_compatible(&self, other: &FlowState) -> Result<()> {
        if self.problem != other.problem {
            return Err(Error::KindMismatch("Boussinesq and MHD states mixed".into()));
        }
        self.primary.check_compatible(&other.primary)
    }

    pub fn max_abs_diff(&self, other: &FlowState) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .primary
            .max_abs_diff(&other.primary)?
            .max(self.companion.max_abs_diff(&other.companion)?))
    }

    pub fn max_abs(&self) -> f64 {
        self.primary.max_abs().max(self.companion.max_abs())
    }

    /// Root of the summed squared moduli over all modes and components.
    pub fn l2(&self) -> f64 {
        self.primary
            .data
            .iter()
            .chain(&self.companion.data)
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.primary.conjugate_symmetry_defect().max(self.companion.conjugate_symmetry_defect())
    }

    pub fn divergence_defect(&self) -> f64 {
        self.primary.divergence_defect().0.max(self.companion.divergence_defect().0)
    }

    /// Linear interpolation `(1 - w) a + w b`.
    pub(crate) fn lerp(a: &FlowState, b: &FlowState, w: f64) -> FlowState {
        if w == 0.0 {
            return a.clone();
        }
        if w == 1.0 {
            return b.clone();
        }
        let mut out = a.scaled(1.0 - w);
        out.axpy_unchecked(w, b);
        out
    }
}
