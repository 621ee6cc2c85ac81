//! Power series of the Borel-plane solution about `p = 0`, the small-`t`
//! series it is the Borel transform of, and the majorant used to bound their
//! radius.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{field_norm, NormParams};
use crate::spectral::{FlowState, Model, PhysicalParams, Problem, SpectralField};

/// Magnitude at which coefficient storage is declared to overflow.
const OVERFLOW: f64 = 1e280;

/// `Y(p) = sum_l c_l p^l`, with `c_0 = Y1 = rhs(Y0)`.
#[derive(Debug, Clone)]
pub struct BorelTaylorSeries {
    model: Model,
    coeffs: Vec<FlowState>,
}

impl BorelTaylorSeries {
    pub fn problem(&self) -> Problem {
        self.model.problem()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, l: usize) -> &FlowState {
        &self.coeffs[l]
    }

    pub fn coeffs(&self) -> &[FlowState] {
        &self.coeffs
    }

    /// Series with prescribed coefficients; used to test the estimators.
    pub fn from_coeffs(model: Model, coeffs: Vec<FlowState>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a series needs at least one coefficient".into()));
        }
        for c in &coeffs {
            model.check_state(c)?;
        }
        Ok(Self { model, coeffs })
    }
}

/// `ln(a! b! / (a + b + 1)!)`-style weights from a table of `ln n!`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}

fn check_overflow(c: &FlowState, order: usize) -> Result<()> {
    let m = c.max_abs();
    if !m.is_finite() || m > OVERFLOW {
        return Err(Error::Overflow { order });
    }
    Ok(())
}

/// Borel-plane Taylor coefficients for any state of the model.
///
/// With `U0` the data, the coefficients obey
/// `(l+1)(l+2) c_{l+1} = L c_l + N(U0, c_l) + N(c_l, U0) + sum_{a+b=l-1} a! b!/l! N(c_a, c_b)`.
pub fn borel_series(model: &Model, y0: &FlowState, forcing: &SpectralField, order: usize) -> Result<BorelTaylorSeries> {
    model.check_data(y0)?;
    model.check_forcing(forcing)?;
    let lnf = ln_factorials(order + 1);
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(model.rhs(y0, forcing));
    check_overflow(&coeffs[0], 0)?;
    for l in 0..order {
        let cl = &coeffs[l];
        let mut next = model.linear(cl);
        next.axpy_unchecked(1.0, &model.nonlinear(y0, cl));
        next.axpy_unchecked(1.0, &model.nonlinear(cl, y0));
        if l >= 1 {
            for a in 0..l {
                let b = l - 1 - a;
                let w = (lnf[a] + lnf[b] - lnf[l]).exp();
                next.axpy_unchecked(w, &model.nonlinear(&coeffs[a], &coeffs[b]));
            }
        }
        next.scale(1.0 / ((l + 1) * (l + 2)) as f64);
        check_overflow(&next, l + 1)?;
        coeffs.push(next);
    }
    Ok(BorelTaylorSeries { model: model.clone(), coeffs })
}

pub fn series_boussinesq(
    u0: &SpectralField,
    theta0: &SpectralField,
    forcing: &SpectralField,
    params: &PhysicalParams,
    order: usize,
) -> Result<BorelTaylorSeries> {
    let y0 = FlowState::new(Problem::Boussinesq, u0.clone(), theta0.clone())?;
    let model = Model::new(Problem::Boussinesq, *params, *u0.lattice())?;
    borel_series(&model, &y0, forcing, order)
}

pub fn series_mhd(
    v0: &SpectralField,
    b0: &SpectralField,
    forcing: &SpectralField,
    params: &PhysicalParams,
    order: usize,
) -> Result<BorelTaylorSeries> {
    let y0 = FlowState::new(Problem::Mhd, v0.clone(), b0.clone())?;
    let model = Model::new(Problem::Mhd, *params, *v0.lattice())?;
    borel_series(&model, &y0, forcing, order)
}

/// Small-`t` coefficients `u^[m]`, `m = 0..=order`, of the solution itself:
/// `u^[m+1] = (F delta_{m0} + L u^[m] + sum_{l<=m} N(u^[l], u^[m-l])) / (m + 1)`.
pub fn tspace_series(model: &Model, y0: &FlowState, forcing: &SpectralField, order: usize) -> Result<Vec<FlowState>> {
    model.check_data(y0)?;
    model.check_forcing(forcing)?;
    let mut out = vec![y0.clone()];
    for m in 0..order {
        let mut next = model.linear(&out[m]);
        for l in 0..=m {
            next.axpy_unchecked(1.0, &model.nonlinear(&out[l], &out[m - l]));
        }
        if m == 0 {
            next.primary_mut().axpy(1.0.into(), forcing)?;
        }
        next.scale(1.0 / (m + 1) as f64);
        check_overflow(&next, m + 1)?;
        out.push(next);
    }
    Ok(out)
}

/// Partial sum of the series at `p` and the size of its last retained term.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: FlowState,
    pub truncation: f64,
}

pub fn eval_series(series: &BorelTaylorSeries, p: f64) -> Result<SeriesValue> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("series evaluation needs p >= 0, got {p}")));
    }
    let n = series.order();
    let mut acc = series.coeffs[n].clone();
    for l in (0..n).rev() {
        acc.scale(p);
        acc.axpy_unchecked(1.0, &series.coeffs[l]);
    }
    let truncation = if n == 0 { 0.0 } else { series.coeffs[n].max_abs() * p.powi(n as i32) };
    Ok(SeriesValue { value: acc, truncation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusEstimate {
    Finite { radius: f64 },
    /// Coefficients decay faster than any geometric sequence over the
    /// available orders, so the radius exceeds anything the series resolves.
    AboveCutoff,
}

impl RadiusEstimate {
    pub fn radius(&self) -> f64 {
        match self {
            RadiusEstimate::Finite { radius } => *radius,
            RadiusEstimate::AboveCutoff => f64::INFINITY,
        }
    }
}

/// Curvature coefficient of `ln ||c_l||` in `l ln l` below which the decay
/// counts as superexponential (factorial decay gives about -1 per factorial).
const SUPEREXPONENTIAL: f64 = -0.5;

/// Root-test estimate `1 / limsup ||c_l||^{1/l}` from a least-squares fit of
/// `ln ||c_l||` against `l` over the upper half of the orders.
pub fn radius_estimate(series: &BorelTaylorSeries, nparams: &NormParams) -> Result<RadiusEstimate> {
    let order = series.order();
    if order < 8 {
        return Err(Error::InvalidParameter(format!("radius estimate needs order >= 8, got {order}")));
    }
    let norms: Vec<f64> = series.coeffs.iter().map(|c| field_norm(c, nparams)).collect();
    radius_from_norms(&norms)
}

pub(crate) fn radius_from_norms(norms: &[f64]) -> Result<RadiusEstimate> {
    let order = norms.len() - 1;
    let pts: Vec<(f64, f64)> = (order / 2..=order)
        .filter(|&l| l >= 1 && norms[l] > 0.0)
        .map(|l| (l as f64, norms[l].ln()))
        .collect();
    if pts.len() < 4 {
        // all-zero (or nearly so) tails are entire for every practical purpose
        return Ok(RadiusEstimate::AboveCutoff);
    }
    // ln c = a + s l + g l ln l
    let design: Vec<[f64; 3]> = pts.iter().map(|&(l, _)| [1.0, l, l * l.ln()]).collect();
    let rhs: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
    let [_, _, g] = least_squares3(&design, &rhs);
    if g < SUPEREXPONENTIAL {
        return Ok(RadiusEstimate::AboveCutoff);
    }
    // the slope of the plain linear fit is the root-test rate
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(RadiusEstimate::Finite { radius: (-slope).exp() })
}

/// Normal-equation solve of a 3-column least-squares problem.
fn least_squares3(rows: &[[f64; 3]], rhs: &[f64]) -> [f64; 3] {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (r, &y) in rows.iter().zip(rhs) {
        for i in 0..3 {
            b[i] += r[i] * y;
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("rows");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Dominating sequence for the norms of the small-`t` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantSequence {
    pub a_tilde: Vec<f64>,
    pub k1: f64,
    pub radius_bound: f64,
    /// Highest order reached; smaller than requested when the sequence overflowed.
    pub attained_order: usize,
}

/// `a_{m+1} = b_m/(m+1) + a a_m/(m+1) + K1^2 max(nu, mu)(m+1) a_m + 2 K1 C0 sum_l a_l a_{m-l}`.
///
/// `b` holds the forcing norms by order; missing entries count as zero.
pub fn majorant_sequence(
    a0: f64,
    b: &[f64],
    k1: f64,
    c0: f64,
    params: &PhysicalParams,
    order: usize,
) -> Result<MajorantSequence> {
    if !(k1 > 0.0 && k1.is_finite()) {
        return Err(Error::InvalidParameter(format!("K1 must be positive, got {k1}")));
    }
    if !(a0 >= 0.0 && a0.is_finite()) {
        return Err(Error::InvalidParameter(format!("a0 must be nonnegative, got {a0}")));
    }
    params.validate()?;
    let diff = params.m1();
    let mut a = vec![a0];
    let mut attained = 0;
    for m in 0..order {
        let mf = (m + 1) as f64;
        let conv: f64 = (0..=m).map(|l| a[l] * a[m - l]).sum();
        let bm = b.get(m).copied().unwrap_or(0.0);
        let next = bm / mf + params.buoyancy_a * a[m] / mf + k1 * k1 * diff * mf * a[m] + 2.0 * k1 * c0 * conv;
        if !next.is_finite() || next > OVERFLOW {
            break;
        }
        a.push(next);
        attained = m + 1;
    }
    Ok(MajorantSequence { a_tilde: a, k1, radius_bound: 1.0 / (k1 * k1 * diff), attained_order: attained })
}

/// Largest `|k|` carried by the data or the forcing.
pub fn support_radius(y0: &FlowState, forcing: &SpectralField) -> f64 {
    let lat = y0.lattice();
    (0..lat.len())
        .filter(|&i| y0.mode_magnitude(i) > 0.0 || forcing.mode_magnitude(i) > 0.0)
        .map(|i| lat.k_norm(i))
        .fold(0.0, f64::max)
}
