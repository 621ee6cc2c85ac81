//! Order-one Bessel functions and the Borel-plane Green kernels built from them.
//!
//! `J1`/`Y1` use the ascending series below `z = 16` (double-double arithmetic
//! above `z = 6`, where the alternating terms grow large enough for plain
//! doubles to lose digits) and the Hankel asymptotic expansion from 16 on.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SERIES_F64_MAX: f64 = 6.0;
const SERIES_DD_MAX: f64 = 16.0;
const SMALL_Z: f64 = 1e-4;
/// Near-diagonal switch, relative to `min(z, 1)`.
const NEAR_DIAGONAL: f64 = 1e-3;
const EULER_GAMMA: Dd = Dd { hi: 0.577_215_664_901_532_9, lo: -4.942_915_152_430_645e-18 };

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = ((self.hi - p) - e) + self.lo;
        quick_two_sum(q1, r / d)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Ascending series for `(J1(z), Y1(z))` in plain doubles.
fn series_f64(z: f64) -> (f64, f64) {
    let x = 0.5 * z;
    let q = -x * x;
    let mut term = x;
    let mut j = term;
    let mut harm_k = 0.0;
    let mut harm_k1 = 1.0;
    let mut s2 = term * (harm_k + harm_k1);
    let mut m = 1usize;
    loop {
        term *= q / (m * (m + 1)) as f64;
        harm_k = harm_k1;
        harm_k1 += 1.0 / (m + 1) as f64;
        j += term;
        s2 += term * (harm_k + harm_k1);
        if m as f64 > x && term.abs() <= 1e-18 * j.abs().max(s2.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        m += 1;
    }
    let y = FRAC_2_PI * j * (x.ln() + EULER_GAMMA.hi) - FRAC_2_PI / z - s2 / PI;
    (j, y)
}

/// Same series in double-double arithmetic.
fn series_dd(z: f64) -> (f64, f64) {
    let x = 0.5 * z;
    let xx = x * x;
    let q = Dd { hi: -xx, lo: -x.mul_add(x, -xx) };
    let mut term = Dd::from(x);
    let mut j = term;
    let mut harm_k = Dd::ZERO;
    let mut harm_k1 = Dd::from(1.0);
    let mut s2 = term.mul(harm_k.add(harm_k1));
    let mut biggest = x;
    let mut m = 1usize;
    loop {
        term = term.mul(q).div_f64((m * (m + 1)) as f64);
        harm_k = harm_k1;
        harm_k1 = harm_k1.add(Dd::from(1.0).div_f64((m + 1) as f64));
        j = j.add(term);
        s2 = s2.add(term.mul(harm_k.add(harm_k1)));
        biggest = biggest.max(term.hi.abs() * harm_k1.hi);
        if m as f64 > x && term.hi.abs() * harm_k1.hi <= 1e-34 * biggest {
            break;
        }
        m += 1;
    }
    let jf = j.to_f64();
    let log_term = Dd::from(x.ln()).add(EULER_GAMMA).mul(j).to_f64();
    let y = FRAC_2_PI * log_term - FRAC_2_PI / z - s2.to_f64() / PI;
    (jf, y)
}

/// Hankel asymptotic expansion, truncated at the smallest term.
fn asymptotic(z: f64) -> (f64, f64) {
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * k as f64 * z);
        if a.abs() >= prev || a.abs() < 1e-18 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let (s, c) = z.sin_cos();
    // chi = z - 3 pi / 4
    let cos_chi = (s - c) * FRAC_1_SQRT_2;
    let sin_chi = -(s + c) * FRAC_1_SQRT_2;
    let amp = (FRAC_2_PI / z).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

/// `(J1(z), Y1(z))` for `z > 0`.
pub(crate) fn j1_y1(z: f64) -> (f64, f64) {
    if z < SERIES_F64_MAX {
        series_f64(z)
    } else if z < SERIES_DD_MAX {
        series_dd(z)
    } else {
        asymptotic(z)
    }
}

/// Bessel function of the first kind, order one. Odd in `z`.
pub fn bessel_j1(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if z < 0.0 {
        return -bessel_j1(-z);
    }
    if z < SERIES_F64_MAX {
        // cheaper than the paired series
        let x = 0.5 * z;
        let q = -x * x;
        let mut term = x;
        let mut sum = x;
        let mut m = 1usize;
        loop {
            term *= q / (m * (m + 1)) as f64;
            sum += term;
            if m as f64 > x && term.abs() <= 1e-18 * sum.abs() {
                return sum;
            }
            m += 1;
        }
    }
    j1_y1(z).0
}

/// Bessel function of the second kind, order one.
pub fn bessel_y1(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Y1 needs a positive finite argument, got {z}")));
    }
    Ok(j1_y1(z).1)
}

/// `2 J1(z) / z`, equal to 1 at the origin.
pub fn two_j1_over_z(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        return 1.0 - z * z / 8.0;
    }
    2.0 * bessel_j1(z) / z
}

/// `G(z, z') = z' (-J1(z) Y1(z') + Y1(z) J1(z'))` for `0 <= z' <= z`.
pub fn kernel_g(z: f64, z_prime: f64) -> Result<f64> {
    check_pair(z, z_prime)?;
    if z == z_prime {
        return Ok(0.0);
    }
    if z < SMALL_Z {
        let r = (z_prime / z).powi(2);
        return Ok(z / PI * small_kernel(z, r));
    }
    let (jz, yz) = j1_y1(z);
    let (jp, yp) = if z_prime > 0.0 { j1_y1(z_prime) } else { (0.0, 0.0) };
    Ok(g_from_parts(z, jz, yz, z_prime, jp, yp))
}

/// `G(z, z') / z`.
pub fn kernel_g_over_z(z: f64, z_prime: f64) -> Result<f64> {
    check_pair(z, z_prime)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z < SMALL_Z {
        let r = (z_prime / z).powi(2);
        return Ok(small_kernel(z, r) / PI);
    }
    Ok(kernel_g(z, z_prime)? / z)
}

fn check_pair(z: f64, z_prime: f64) -> Result<()> {
    if !(z.is_finite() && z_prime.is_finite()) || z_prime < 0.0 || z_prime > z {
        return Err(Error::Domain(format!("kernel needs 0 <= z' <= z, got z = {z}, z' = {z_prime}")));
    }
    Ok(())
}

/// Kernel `H(p, p'; nu |k|^2) = (pi / z) G(z, z')` with `z = 2 sqrt(nu |k|^2 p)`.
///
/// Regular at `p = 0` direction: equals `1 - p'/p` when `nu |k|^2 = 0`.
pub fn kernel_h(p: f64, p_prime: f64, ksq_nu: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("kernel_H needs p > 0, got {p}")));
    }
    if !(p_prime >= 0.0 && p_prime <= p) {
        return Err(Error::Domain(format!("kernel_H needs 0 <= p' <= p, got p' = {p_prime}")));
    }
    if !(ksq_nu >= 0.0) || !ksq_nu.is_finite() {
        return Err(Error::Domain(format!("kernel_H needs nu|k|^2 >= 0, got {ksq_nu}")));
    }
    if p_prime == p {
        return Ok(0.0);
    }
    let z = 2.0 * (ksq_nu * p).sqrt();
    if z < SMALL_Z {
        return Ok(small_kernel(z, p_prime / p));
    }
    let zp = 2.0 * (ksq_nu * p_prime).sqrt();
    let (jz, yz) = j1_y1(z);
    let (jp, yp) = if zp > 0.0 { j1_y1(zp) } else { (0.0, 0.0) };
    Ok(PI / z * g_from_parts(z, jz, yz, zp, jp, yp))
}

/// Two-term expansion of `H` in `z^2` at fixed `r = p'/p`:
/// `(1 - r) - (z^2 / 8)(1 + 2 r ln r - r^2)`.
fn small_kernel(z: f64, r: f64) -> f64 {
    let rlnr = if r > 0.0 { r * r.ln() } else { 0.0 };
    (1.0 - r) - z * z / 8.0 * (1.0 + 2.0 * rlnr - r * r)
}

/// `G` from precomputed Bessel values; `(jp, yp)` are ignored when `zp = 0`.
#[inline]
pub(crate) fn g_from_parts(z: f64, jz: f64, yz: f64, zp: f64, jp: f64, yp: f64) -> f64 {
    if zp == 0.0 {
        return FRAC_2_PI * jz;
    }
    let d = z - zp;
    if d <= NEAR_DIAGONAL * z.min(1.0) {
        // Taylor expansion in d about the diagonal; the coefficients follow
        // from the Bessel equation and the Wronskian 2/(pi z).
        let d2 = d * d;
        return (2.0 * d - d2 / z - d2 * d / 3.0 + d2 * d2 / (6.0 * z)) / PI;
    }
    zp * (yz * jp - jz * yp)
}

/// Kernel `H(p_n, p_i)` along one grid row for a fixed `nu |k|^2`, with the
/// Bessel values at every node cached.
#[derive(Debug, Clone)]
pub(crate) struct KernelRow {
    ksq_nu: f64,
    z: Vec<f64>,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl KernelRow {
    pub(crate) fn new(ksq_nu: f64, nodes: &[f64]) -> Self {
        let z: Vec<f64> = nodes.iter().map(|&p| 2.0 * (ksq_nu * p).sqrt()).collect();
        let (j, y) = z.iter().map(|&zz| if zz > 0.0 { j1_y1(zz) } else { (0.0, 0.0) }).unzip();
        Self { ksq_nu, z, j, y }
    }

    /// `2 J1(z_n) / z_n`.
    pub(crate) fn heat(&self, n: usize) -> f64 {
        let z = self.z[n];
        if z < 1e-8 {
            1.0 - z * z / 8.0
        } else {
            2.0 * self.j[n] / z
        }
    }

    /// `H(p_n, p_i)` for `i <= n`; `nodes` must be the grid the row was built on.
    pub(crate) fn h(&self, nodes: &[f64], n: usize, i: usize) -> f64 {
        if i == n {
            return 0.0;
        }
        let z = self.z[n];
        if z < SMALL_Z || self.ksq_nu == 0.0 {
            return small_kernel(z, nodes[i] / nodes[n]);
        }
        PI / z * g_from_parts(z, self.j[n], self.y[n], self.z[i], self.j[i], self.y[i])
    }
}

/// Numerically scanned suprema of `|G|` and `|G/z|` over `0 <= z' <= z <= z_max`.
///
/// For large `z` the kernel behaves like `(2/pi) sqrt(z'/z) sin(z - z')`, so the
/// supremum over all `z` is the limit `2/pi`, approached slowly from below; the
/// scan to `z = 200` sits within half a percent of it. `|G/z|` peaks at the
/// origin with value `1/pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub sup_g: f64,
    pub sup_g_over_z: f64,
    pub z_max_scan: f64,
    pub grid_resolution: f64,
}

impl KernelTable {
    /// Scans `z` in steps of `step` up to `z_max`, with `interior` evenly spaced
    /// `z'` points plus both endpoints on each row.
    pub fn scan(z_max: f64, step: f64, interior: usize) -> Result<Self> {
        if !(z_max > 0.0 && step > 0.0 && step <= z_max) || interior == 0 {
            return Err(Error::InvalidParameter("kernel scan needs 0 < step <= z_max".into()));
        }
        let rows = (z_max / step).round() as usize;
        let mut sup_g = 0.0f64;
        // the z -> 0 row, where G/z -> (1 - (z'/z)^2) / pi
        let mut sup_gz = 1.0 / PI;
        for r in 1..=rows {
            let z = step * r as f64;
            let (jz, yz) = j1_y1(z);
            for j in 0..=interior {
                let zp = z * j as f64 / (interior + 1) as f64;
                let g = if z < SMALL_Z {
                    z / PI * small_kernel(z, (zp / z).powi(2))
                } else {
                    let (jp, yp) = if zp > 0.0 { j1_y1(zp) } else { (0.0, 0.0) };
                    g_from_parts(z, jz, yz, zp, jp, yp)
                };
                sup_g = sup_g.max(g.abs());
                sup_gz = sup_gz.max(g.abs() / z);
            }
        }
        Ok(Self { sup_g, sup_g_over_z: sup_gz, z_max_scan: z_max, grid_resolution: step })
    }

    /// The standard scan (`z <= 200`, step 0.01, 200 interior points), computed once.
    pub fn global() -> &'static KernelTable {
        static TABLE: OnceLock<KernelTable> = OnceLock::new();
        TABLE.get_or_init(|| KernelTable::scan(200.0, 0.01, 200).expect("valid scan parameters"))
    }
}

/// `J1 Y1' - J1' Y1` with the derivatives taken by central differences;
/// equals `2 / (pi z)` for exact Bessel functions.
pub fn wronskian_value(z: f64) -> f64 {
    let h = 1e-5 * z.max(1.0);
    let (j, y) = j1_y1(z);
    let (jp, yp) = j1_y1(z + h);
    let (jm, ym) = j1_y1(z - h);
    let dj = (jp - jm) / (2.0 * h);
    let dy = (yp - ym) / (2.0 * h);
    j * dy - dj * y
}

/// Relative residual of `p H_pp + 2 H_p + l H = 0` for `H = kernel_h(., p', l)`,
/// by central differences with step `step * min(p - p', 1)`.
pub fn kernel_ode_residual(p: f64, p_prime: f64, l: f64, step: f64) -> f64 {
    let h = |x: f64| kernel_h(x, p_prime, l).unwrap_or(f64::NAN);
    let d = step * (p - p_prime).min(1.0);
    let (hm, h0, hp) = (h(p - d), h(p), h(p + d));
    let hpp = (hp - 2.0 * h0 + hm) / (d * d);
    let hd = (hp - hm) / (2.0 * d);
    (p * hpp + 2.0 * hd + l * h0).abs() / h0.abs().max(l).max(1.0)
}

/// `int_0^inf 2J1(z)/z e^{-p/t} dp` with `z = 2 sqrt(l p)`, by composite
/// 8-point Gauss-Legendre on `[0, 40 t]`; the closed form is `(1 - e^{-l t}) / l`.
pub fn laplace_identity_value(l: f64, t: f64) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let upper = 40.0 * t;
    let panels = 400;
    let h = upper / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            for p in [mid - 0.5 * h * x, mid + 0.5 * h * x] {
                sum += 0.5 * h * w * two_j1_over_z(2.0 * (l * p).sqrt()) * (-p / t).exp();
            }
        }
    }
    sum
}
