//! Windowed pressure, critical exponent and scaling scans.
//!
//! For a window `|ℓ_γ − t| ≤ h` the weighted count is
//! `W(t) = Σ e^{∫_γ ω}`; the pressure estimate is `log W(t) / t` and the
//! critical exponent estimate is the least-squares slope of `log W` over the
//! disjoint windows of the certified range.
//!
//! With `correction` on, the window asymptotic
//! `W(t) ~ e^{tP}·2sinh(hP)/(tP)` is applied to both: the pressure solves
//! `P = (log W(t) + log t − log(2sinh(hP)/P)) / t` and the slope is fitted to
//! `log W(t) + log t`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{self, FormsError, HarmonicForm};
use crate::geodesics::GeodesicTable;
use crate::numeric::{kahan_sum, log_sum_exp};

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("no geodesics in window |ℓ − {t}| ≤ {halfwidth}")]
    EmptyWindow { t: f64, halfwidth: f64 },
    #[error("window |ℓ − {t}| ≤ {halfwidth} extends beyond the certified range {complete_below}")]
    WindowBeyondCertifiedRange { t: f64, halfwidth: f64, complete_below: f64 },
    #[error("certified range holds {found} nonempty windows, need at least {needed}")]
    InsufficientRange { found: usize, needed: usize },
    #[error("corrected pressure iteration failed at t = {0}")]
    NoConvergence(f64),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureOptions {
    pub halfwidth: f64,
    /// Apply the `1/t` growth correction.
    pub correction: bool,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions { halfwidth: 0.5, correction: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub t: f64,
    pub halfwidth: f64,
    /// Spread of the estimate over the window and the two disjoint windows
    /// below it; infinite when fewer than three are available.
    pub slack: f64,
    pub n_terms: usize,
    #[serde(skip)]
    pub cutoff_l: f64,
}

/// Centre of the largest window inside the certified range.
pub fn largest_certified_t(table: &GeodesicTable, halfwidth: f64) -> f64 {
    table.complete_below - halfwidth
}

/// `(log W(t), count)` for the window about `t`.
fn log_window_sum(table: &GeodesicTable, form: &HarmonicForm, t: f64, halfwidth: f64) -> Result<(f64, usize), ThermoError> {
    let w = table.window(t - halfwidth, t + halfwidth);
    let xs = w.iter().map(|r| forms::integral(form, r)).collect::<Result<Vec<_>, _>>()?;
    let lw = log_sum_exp(&xs).ok_or(ThermoError::EmptyWindow { t, halfwidth })?;
    Ok((lw, xs.len()))
}

/// `log(2sinh(hp)/p)`, continuous at `p = 0`.
fn log_window_mass(p: f64, h: f64) -> f64 {
    let x = p * h;
    if x.abs() < 1e-8 {
        (2.0 * h).ln()
    } else {
        (2.0 * x.sinh() / p).ln()
    }
}

fn corrected(log_w: f64, t: f64, h: f64) -> Result<f64, ThermoError> {
    let mut p = log_w / t;
    for _ in 0..500 {
        let next = (log_w + t.ln() - log_window_mass(p, h)) / t;
        if !next.is_finite() {
            return Err(ThermoError::NoConvergence(t));
        }
        if (next - p).abs() <= 1e-15 * p.abs().max(1.0) {
            return Ok(next);
        }
        p = next;
    }
    Err(ThermoError::NoConvergence(t))
}

fn point_value(table: &GeodesicTable, form: &HarmonicForm, t: f64, opts: &PressureOptions) -> Result<(f64, usize), ThermoError> {
    let (lw, n) = log_window_sum(table, form, t, opts.halfwidth)?;
    let v = if opts.correction { corrected(lw, t, opts.halfwidth)? } else { lw / t };
    Ok((v, n))
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// `(1/t)·log Σ_{|ℓ_γ − t| ≤ 1/2} e^{∫_γ ω}` with default options.
pub fn pressure_estimate(table: &GeodesicTable, form: &HarmonicForm, t: f64, halfwidth: f64) -> Result<PressureEstimate, ThermoError> {
    pressure_estimate_with(table, form, t, &PressureOptions { halfwidth, ..Default::default() })
}

pub fn pressure_estimate_with(
    table: &GeodesicTable,
    form: &HarmonicForm,
    t: f64,
    opts: &PressureOptions,
) -> Result<PressureEstimate, ThermoError> {
    form.check_dim(table)?;
    let h = opts.halfwidth;
    if t + h > table.complete_below * (1.0 + 1e-12) {
        return Err(ThermoError::WindowBeyondCertifiedRange { t, halfwidth: h, complete_below: table.complete_below });
    }
    let (value, n_terms) = point_value(table, form, t, opts)?;
    let mut vals = vec![value];
    for k in 1..3 {
        let tk = t - 2.0 * h * k as f64;
        if tk - h < 0.0 {
            break;
        }
        match point_value(table, form, tk, opts) {
            Ok((v, _)) => vals.push(v),
            Err(ThermoError::EmptyWindow { .. }) | Err(ThermoError::NoConvergence(_)) => break,
            Err(e) => return Err(e),
        }
    }
    let slack = if vals.len() == 3 { spread(&vals) } else { f64::INFINITY };
    Ok(PressureEstimate { value, t, halfwidth: h, slack, n_terms, cutoff_l: table.cutoff_l })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponent {
    pub value: f64,
    /// Spread of the slope over fits ending at the last three windows.
    pub slack: f64,
    pub windows: usize,
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = kahan_sum(xs.iter().copied()) / n;
    let my = kahan_sum(ys.iter().copied()) / n;
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = kahan_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    sxy / sxx
}

/// Slope of `log W(t)` over the disjoint windows centred at multiples of the
/// window width inside the certified range.
pub fn critical_exponent_estimate(table: &GeodesicTable, form: &HarmonicForm) -> Result<CriticalExponent, ThermoError> {
    critical_exponent_with(table, form, &PressureOptions::default())
}

pub fn critical_exponent_with(
    table: &GeodesicTable,
    form: &HarmonicForm,
    opts: &PressureOptions,
) -> Result<CriticalExponent, ThermoError> {
    form.check_dim(table)?;
    let h = opts.halfwidth;
    let centres: Vec<f64> =
        (1..).map(|k| 2.0 * h * k as f64).take_while(|c| c + h <= table.complete_below * (1.0 + 1e-12)).collect();
    let pts = centres
        .par_iter()
        .map(|&c| match log_window_sum(table, form, c, h) {
            Ok((lw, _)) => Ok(Some((c, if opts.correction { lw + c.ln() } else { lw }))),
            Err(ThermoError::EmptyWindow { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().flatten().unzip();
    if xs.len() < 3 {
        return Err(ThermoError::InsufficientRange { found: xs.len(), needed: 3 });
    }
    let n = xs.len();
    let value = lsq_slope(&xs, &ys);
    let slack = if n >= 5 {
        let s: Vec<f64> = (0..3).map(|j| lsq_slope(&xs[..n - j], &ys[..n - j])).collect();
        spread(&s)
    } else {
        f64::INFINITY
    };
    Ok(CriticalExponent { value, slack, windows: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub scale: f64,
    pub pressure: PressureEstimate,
    /// `Pr̂(scale·ω) − scale·‖ω‖_s` using the table's stable-norm bound.
    pub excess: f64,
}

/// `Pr̂(sω) − s·stable_norm_lb` for each scale `s`, at the largest certified
/// window.
pub fn pressure_limit_scan(
    table: &GeodesicTable,
    form: &HarmonicForm,
    scales: &[f64],
    opts: &PressureOptions,
) -> Result<Vec<ScanPoint>, ThermoError> {
    let snorm = forms::stable_norm_lb(table, form)?;
    let t = largest_certified_t(table, opts.halfwidth);
    scales
        .par_iter()
        .map(|&s| {
            let pressure = pressure_estimate_with(table, &form.scaled(s), t, opts)?;
            Ok(ScanPoint { scale: s, pressure, excess: pressure.value - s * snorm })
        })
        .collect()
}

/// Checks the finite-size form of `max{1, ‖ω‖_s} ≤ Pr(ω) ≤ 1 + ‖ω‖_s`:
/// `snorm − slack ≤ Pr̂ ≤ 1 + snorm + slack + ENTROPY_BAND`.
pub const ENTROPY_BAND: f64 = 0.3;

pub fn pressure_band_holds(pr: &PressureEstimate, snorm: f64) -> bool {
    snorm - pr.slack <= pr.value && pr.value <= 1.0 + snorm + pr.slack + ENTROPY_BAND
}
