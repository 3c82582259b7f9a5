//! Geometric and identity terms of the twisted trace formula, the correlation
//! sums `S(t, ξ)` and their Gaussian averages `I(t, σ)`, and arithmetic
//! `L(m)` sums.

pub mod testfn;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{self, FormsError, HarmonicForm};
use crate::geodesics::{GeodesicRecord, GeodesicTable};
use crate::numeric::{composite_gauss_legendre, integrate_complex, ComplexKahan, KahanSum};
use crate::surfaces::{self, Model};
pub use testfn::{bump, bump_hat, cosine_transform, fourier_hat, fourier_hat_real, plateau, SymmetrizedG, TestFunction};

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("window around t = {t} reaches {reach}, beyond the certified range {complete_below}")]
    WindowBeyondCertifiedRange { t: f64, reach: f64, complete_below: f64 },
    #[error("L(m) needs a table of an arithmetic model")]
    NonArithmetic,
    #[error("table digest does not match the model")]
    DigestMismatch,
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// `e^{∫ω} ℓ^# / (2 sinh(ℓ/2))`.
fn orbit_weight(form: &HarmonicForm, r: &GeodesicRecord) -> Result<f64, FormsError> {
    Ok(forms::integral(form, r)?.exp() * r.primitive_length / (2.0 * (r.length / 2.0).sinh()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricSum {
    pub value: Complex64,
    pub n_terms: usize,
    /// False when the support of `g` reaches past `complete_below`.
    pub certified: bool,
    pub warning: Option<String>,
    /// For a bump centred at `d = kℓ₀`, the largest single-term bound
    /// `ℓ₀ e^{kℓ₀(ω̄_{γ₀} − 1/2)}` over primitive `γ₀` in the table.
    pub single_term_bound: Option<f64>,
}

/// `ℓ₀ e^{kℓ₀(ω̄_{γ₀} − 1/2)}`.
pub fn single_term_bound(form: &HarmonicForm, gamma0: &GeodesicRecord, k: u32) -> Result<f64, FormsError> {
    let l0 = gamma0.primitive_length;
    let avg = forms::integral(form, gamma0)? / gamma0.length;
    Ok(l0 * (k as f64 * l0 * (avg - 0.5)).exp())
}

/// `Σ_γ e^{∫_γ ω} ℓ_γ^# g(ℓ_γ) / (2 sinh(ℓ_γ/2))` over all records.
pub fn geometric_sum(table: &GeodesicTable, form: &HarmonicForm, g: &SymmetrizedG) -> Result<GeometricSum, TraceError> {
    form.check_dim(table)?;
    let radius = g.support_radius();
    let certified = radius <= table.complete_below;
    let warning = (!certified).then(|| {
        format!("support radius {radius} exceeds certified range {}; sum is not certified", table.complete_below)
    });
    let mut acc = ComplexKahan::default();
    let mut n_terms = 0;
    for r in table.window(0.0, radius) {
        let gv = g.eval(r.length);
        if gv == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc.add(gv * orbit_weight(form, r)?);
        n_terms += 1;
    }
    let single_term_bound = match g.f {
        TestFunction::BumpScaled { d, .. } => {
            let mut best: Option<f64> = None;
            for r in table.primitive() {
                let k = (d / r.length).round();
                if k >= 1.0 && (k * r.length - d).abs() <= 1e-9 * d.abs().max(1.0) {
                    let b = single_term_bound(form, r, k as u32)?;
                    best = Some(best.map_or(b, |x: f64| x.max(b)));
                }
            }
            best
        }
        TestFunction::Modulated { .. } => None,
    };
    Ok(GeometricSum { value: acc.value(), n_terms, certified, warning, single_term_bound })
}

fn identity_integrand(g: &SymmetrizedG, r: f64) -> Complex64 {
    fourier_hat_real(g, r) * (r * (PI * r).tanh())
}

/// Upper limit beyond which `|r ĝ(r) tanh(πr)|` stays below `1e−14` of its
/// peak (or below the roundoff floor of `ĝ`), and the peak.
pub fn identity_cutoff(g: &SymmetrizedG) -> (f64, f64) {
    let (centre, scale) = g.frequency_profile();
    let step = (0.5 / g.support_radius().max(1e-3)).min(0.25 * scale);
    let r_min = centre + 4.0 * scale;
    let r_cap = centre + 5000.0 * scale;
    let floor = 4.0 * f64::EPSILON * g.l1_norm();
    let mut peak: f64 = 0.0;
    let mut quiet = 0;
    let mut r = 0.0;
    while r < r_cap {
        let v = identity_integrand(g, r).norm();
        peak = peak.max(v);
        if v < (1e-14 * peak).max(floor * r) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if r > r_min && quiet >= 16 {
            return (r, peak);
        }
        r += step;
    }
    (r_cap, peak)
}

/// Quadrature scheme for the identity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityScheme {
    GaussKronrod,
    GaussLegendre,
}

/// `Vol/4π ∫_ℝ r ĝ(r) tanh(πr) dr`.
pub fn identity_term(volume: f64, g: &SymmetrizedG) -> Complex64 {
    identity_term_with(volume, g, IdentityScheme::GaussKronrod)
}

pub fn identity_term_with(volume: f64, g: &SymmetrizedG, scheme: IdentityScheme) -> Complex64 {
    let (upper, peak) = identity_cutoff(g);
    let half = match scheme {
        IdentityScheme::GaussKronrod => {
            integrate_complex(|r| identity_integrand(g, r), 0.0, upper, 1e-10 * peak, 1e-10).value
        }
        IdentityScheme::GaussLegendre => {
            // panels resolve the oscillation e^{±iTr}
            let panels = ((upper * g.support_radius() / PI).ceil() as usize).clamp(16, 200_000);
            composite_gauss_legendre(|r| identity_integrand(g, r), 0.0, upper, panels, 20)
        }
    };
    // ĝ is even, so the integrand is even
    half * (2.0 * volume / (4.0 * PI))
}

fn check_window(table: &GeodesicTable, t: f64) -> Result<(), TraceError> {
    if t + 1.0 > table.complete_below * (1.0 + 1e-12) {
        return Err(TraceError::WindowBeyondCertifiedRange { t, reach: t + 1.0, complete_below: table.complete_below });
    }
    Ok(())
}

/// Records inside `(t − 1, t + 1)` with their real weights
/// `e^{∫ω} ℓ^# ψ(ℓ − t) / (2 sinh(ℓ/2))`.
fn window_terms(table: &GeodesicTable, form: &HarmonicForm, t: f64) -> Result<Vec<(f64, f64)>, TraceError> {
    form.check_dim(table)?;
    table
        .window(t - 1.0, t + 1.0)
        .iter()
        .filter(|r| plateau(r.length - t) > 0.0)
        .map(|r| Ok((r.length, orbit_weight(form, r)? * plateau(r.length - t))))
        .collect()
}

fn s_from_terms(terms: &[(f64, f64)], xi: f64) -> Complex64 {
    let mut acc = ComplexKahan::default();
    for &(l, a) in terms {
        acc.add(Complex64::from_polar(a, l * xi));
    }
    acc.value()
}

/// `S(t, ξ) = Σ_γ e^{∫_γω + iℓ_γξ} ℓ_γ^# ψ(ℓ_γ − t) / (2 sinh(ℓ_γ/2))`.
pub fn s_sum(table: &GeodesicTable, form: &HarmonicForm, t: f64, xi: f64) -> Result<Complex64, TraceError> {
    check_window(table, t)?;
    Ok(s_from_terms(&window_terms(table, form, t)?, xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMethod {
    Direct,
    Quadrature,
}

/// `I(t, σ) = (1/√(2π)σ) ∫ |S(t, ξ)|² e^{−ξ²/2σ²} dξ`.
pub fn gaussian_average(
    table: &GeodesicTable,
    form: &HarmonicForm,
    t: f64,
    sigma: f64,
    method: AverageMethod,
) -> Result<f64, TraceError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(TraceError::BadSigma(sigma));
    }
    check_window(table, t)?;
    let terms = window_terms(table, form, t)?;
    Ok(match method {
        AverageMethod::Direct => {
            let mut acc = KahanSum::new();
            for &(l1, a1) in &terms {
                for &(l2, a2) in &terms {
                    let dl = l1 - l2;
                    acc.add(a1 * a2 * (-0.5 * sigma * sigma * dl * dl).exp());
                }
            }
            acc.value()
        }
        AverageMethod::Quadrature => {
            // |S|² is even in ξ; the Gaussian tail past 9σ is below 1e−18
            let peak: f64 = terms.iter().map(|x| x.1).sum::<f64>().powi(2);
            let q = integrate_complex(
                |xi| Complex64::new(s_from_terms(&terms, xi).norm_sqr() * (-0.5 * (xi / sigma).powi(2)).exp(), 0.0),
                0.0,
                9.0 * sigma,
                1e-16 * peak * sigma,
                1e-12,
            );
            2.0 * q.value.re / ((2.0 * PI).sqrt() * sigma)
        }
    })
}

/// `Σ_{|ℓ_γ − t| ≤ 1/2} (ℓ_γ^#)² e^{2∫_γω} / (4 sinh²(ℓ_γ/2))`.
pub fn diagonal_bound(table: &GeodesicTable, form: &HarmonicForm, t: f64) -> Result<f64, TraceError> {
    form.check_dim(table)?;
    let mut acc = KahanSum::new();
    for r in table.window(t - 0.5, t + 0.5) {
        acc.add(orbit_weight(form, r)?.powi(2));
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LmSum {
    pub m: u64,
    pub value: f64,
    pub count: usize,
}

fn check_arithmetic(table: &GeodesicTable, model: &Model) -> Result<(), TraceError> {
    if !model.is_arithmetic() {
        return Err(TraceError::NonArithmetic);
    }
    if table.model_digest != model.digest() {
        return Err(TraceError::DigestMismatch);
    }
    Ok(())
}

/// `L(m) = Σ_{ℓ_γ = log x_m} ℓ_γ^# e^{∫_γω} / (2 sinh(ℓ_γ/2))`, matching
/// lengths to `1e−6`.
pub fn arithmetic_lm(table: &GeodesicTable, model: &Model, form: &HarmonicForm, m: u64) -> Result<LmSum, TraceError> {
    check_arithmetic(table, model)?;
    form.check_dim(table)?;
    let x = surfaces::xm(m).map_err(|_| TraceError::NonArithmetic)?.value();
    let mut acc = KahanSum::new();
    let mut count = 0;
    for r in table.window(x - 1e-6, x + 1e-6) {
        acc.add(orbit_weight(form, r)?);
        count += 1;
    }
    Ok(LmSum { m, value: acc.value(), count })
}

/// `(Σ_{|log x_m − t| ≤ 1/2} L(m)², I(t, σ))`; the first never exceeds the
/// second.
pub fn lm_diagonal_check(
    table: &GeodesicTable,
    model: &Model,
    form: &HarmonicForm,
    t: f64,
    sigma: f64,
) -> Result<(f64, f64), TraceError> {
    check_arithmetic(table, model)?;
    let mut lhs = KahanSum::new();
    for m in 2u64.. {
        let x = surfaces::xm(m).expect("m ≥ 2").value();
        if x > t + 0.5 {
            break;
        }
        if x >= t - 0.5 {
            lhs.add(arithmetic_lm(table, model, form, m)?.value.powi(2));
        }
    }
    let rhs = gaussian_average(table, form, t, sigma, AverageMethod::Direct)?;
    Ok((lhs.value(), rhs))
}

/// Result of fitting `C` in `|ĝ(r)| ≤ C · envelope(r)` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaleyWienerFit {
    pub constant: f64,
    pub argmax: f64,
    pub m: i32,
    pub points: usize,
    pub r_max: f64,
}

/// Fits the smallest `C` with `|ĝ(r)| ≤ C·(1 + ε|r|)^{−M}·ε` for bumps and
/// `|ĝ(r)| ≤ C·(1 + |r|)^{−M}` for modulated functions over `points`
/// log-spaced real frequencies in `[10⁻³, r_max]` together with `r = 0`.
pub fn paley_wiener_fit(g: &SymmetrizedG, m: i32, points: usize) -> PaleyWienerFit {
    let (centre, scale) = g.frequency_profile();
    let r_max = centre + 200.0 * scale;
    let envelope = |r: f64| match g.f {
        TestFunction::BumpScaled { eps, .. } => eps * (1.0 + eps * r).powi(-m),
        TestFunction::Modulated { .. } => (1.0 + r).powi(-m),
    };
    let lo: f64 = 1e-3;
    let grid = std::iter::once(0.0)
        .chain((0..points).map(|k| lo * (r_max / lo).powf(k as f64 / (points - 1).max(1) as f64)));
    let mut best = (0.0, 0.0);
    for r in grid {
        let c = fourier_hat(g, Complex64::new(r, 0.0)).norm() / envelope(r);
        if c > best.0 {
            best = (c, r);
        }
    }
    PaleyWienerFit { constant: best.0, argmax: best.1, m, points, r_max }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(w: &str, length: f64, h: [i64; 2]) -> GeodesicRecord {
        GeodesicRecord { canon: w.parse().unwrap(), length, primitive_length: length, power: 1, homology: h.to_vec() }
    }

    fn table(recs: Vec<GeodesicRecord>) -> GeodesicTable {
        GeodesicTable::new([0; 32], 10.0, 10.0, 2, recs)
    }

    #[test]
    fn below_systole_sum_is_zero() {
        let t = table(vec![rec("a", 3.0, [1, 0]), rec("A", 3.0, [-1, 0])]);
        let g = SymmetrizedG::bump(0.5, 1.5);
        let s = geometric_sum(&t, &HarmonicForm::new(vec![0.3, 0.0]), &g).unwrap();
        assert_eq!(s.value, Complex64::new(0.0, 0.0));
        assert_eq!(s.n_terms, 0);
    }

    #[test]
    fn single_term_value_and_bound() {
        let t = table(vec![rec("a", 3.0, [1, 0])]);
        let f = HarmonicForm::new(vec![0.7, 0.0]);
        let g = SymmetrizedG::bump(0.5, 3.0);
        let s = geometric_sum(&t, &f, &g).unwrap();
        let expect = (0.7f64).exp() * 3.0 / (2.0 * 1.5f64.sinh());
        assert!((s.value.re - expect).abs() <= 1e-12 * expect);
        let b = s.single_term_bound.unwrap();
        assert!(s.value.re >= b);
    }

    #[test]
    fn non_certified_support_warns() {
        let t = table(vec![rec("a", 3.0, [1, 0])]);
        let s = geometric_sum(&t, &HarmonicForm::zero(2), &SymmetrizedG::bump(0.5, 9.8)).unwrap();
        assert!(!s.certified);
        assert!(s.warning.is_some());
    }

    #[test]
    fn s_sum_conjugation() {
        let t = table(vec![rec("a", 3.0, [1, 0]), rec("b", 3.2, [0, 1]), rec("ab", 3.9, [1, 1])]);
        let f = HarmonicForm::new(vec![0.2, -0.1]);
        for xi in [0.0, 0.5, 3.0, 17.0] {
            let a = s_sum(&t, &f, 3.4, xi).unwrap();
            let b = s_sum(&t, &f, 3.4, -xi).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
        let s0 = s_sum(&table(vec![rec("a", 3.0, [0, 0])]), &HarmonicForm::zero(2), 3.0, 0.0).unwrap();
        assert!(s0.re > 0.0 && s0.im == 0.0);
    }

    #[test]
    fn single_geodesic_average() {
        let t = table(vec![rec("a", 3.0, [1, 0])]);
        let f = HarmonicForm::new(vec![0.4, 0.0]);
        let expect = 9.0 * (0.8f64).exp() / (4.0 * 1.5f64.sinh().powi(2));
        for m in [AverageMethod::Direct, AverageMethod::Quadrature] {
            let v = gaussian_average(&t, &f, 3.0, 2.0, m).unwrap();
            assert!((v - expect).abs() <= 1e-9 * expect, "{m:?}: {v} vs {expect}");
        }
    }

    #[test]
    fn kernel_identity() {
        for (dl, sigma) in [(0.3, 1.0), (1.1, 2.5), (0.05, 10.0)] {
            let q = integrate_complex(
                |xi| Complex64::new(0.0, dl * xi).exp() * (-0.5 * (xi / sigma) * (xi / sigma)).exp(),
                -12.0 * sigma,
                12.0 * sigma,
                1e-14,
                1e-13,
            );
            let v = q.value / ((2.0 * PI).sqrt() * sigma);
            assert!((v.re - (-0.5 * sigma * sigma * dl * dl).exp()).abs() <= 1e-9);
            assert!(v.im.abs() <= 1e-9);
        }
    }

    #[test]
    fn identity_term_is_real_and_linear() {
        let g = SymmetrizedG::bump(0.5, 2.0);
        let a = identity_term(4.0 * PI, &g);
        assert!(a.im.abs() <= 1e-10 * a.re.abs().max(1.0));
        let b = identity_term(8.0 * PI, &g);
        assert!((b - a * 2.0).norm() <= 1e-12 * b.norm());
    }
}
