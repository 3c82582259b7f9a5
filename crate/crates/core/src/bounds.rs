//! Essential-gap bound formulas, admissible strips, non-QUE witnesses and the
//! truncated twisted zeta function.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{self, FormsError, HarmonicForm};
use crate::geodesics::{GeodesicRecord, GeodesicTable};
use crate::numeric::ComplexKahan;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("inputs violate max(1, snorm) ≤ Pr(ω) beyond slack: pr1 = {pr1}, snorm = {snorm}, slack = {slack}")]
    InconsistentInputs { pr1: f64, snorm: f64, slack: f64 },
    #[error("Re s = {re} is not beyond the convergence abscissa {abscissa}")]
    OutsideConvergenceRegion { re: f64, abscissa: f64 },
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Slacks attached to the estimator inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct InputSlacks {
    pub pr1: f64,
    pub pr2: f64,
    pub snorm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapInputs {
    pub pr1: f64,
    pub pr2: f64,
    pub snorm: f64,
    pub slacks: InputSlacks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBounds {
    pub lb_weak: f64,
    pub lb_press: f64,
    pub lb_arith: f64,
    pub ub_press: f64,
    pub ub_stable: f64,
    pub best_lb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    #[serde(flatten)]
    pub raw: GapBounds,
    /// Lower bounds lowered and upper bounds raised by the propagated slack.
    pub conservative: GapBounds,
    pub inputs: GapInputs,
    /// False unless the model is arithmetic, where `lb_arith` is proved.
    pub lb_arith_valid: bool,
    /// `(Pr(2ω) − 1)/2`, reference line only.
    pub conjectured: f64,
}

/// The bound formulas without input checks; `lb_arith` enters `best_lb` only
/// when `arith_valid`.
pub fn formulas(pr1: f64, pr2: f64, snorm: f64, arith_valid: bool) -> GapBounds {
    let lb_weak = 2.0 * snorm - pr1 - 0.5;
    let lb_press = 1.5 * pr2 - 2.0 * pr1 - 0.5;
    let lb_arith = pr1 - 1.25;
    let best_lb = if arith_valid { lb_weak.max(lb_press).max(lb_arith) } else { lb_weak.max(lb_press) };
    GapBounds { lb_weak, lb_press, lb_arith, ub_press: pr1 - 0.5, ub_stable: snorm, best_lb }
}

/// Raw bounds from exact inputs; `lb_arith` counts towards `best_lb`.
pub fn gap_bounds(pr1: f64, pr2: f64, snorm: f64) -> Result<GapReport, BoundsError> {
    gap_report(GapInputs { pr1, pr2, snorm, slacks: InputSlacks::default() }, true)
}

/// The full report. Inputs must satisfy `max(1, snorm) ≤ pr1` within slack.
pub fn gap_report(inputs: GapInputs, arithmetic: bool) -> Result<GapReport, BoundsError> {
    let GapInputs { pr1, pr2, snorm, slacks } = inputs;
    let slack = slacks.pr1 + slacks.snorm;
    if pr1 + slack < 1.0f64.max(snorm) - 1e-12 {
        return Err(BoundsError::InconsistentInputs { pr1, snorm, slack });
    }
    let raw = formulas(pr1, pr2, snorm, arithmetic);
    let (s1, s2, sn) = (slacks.pr1, slacks.pr2, slacks.snorm);
    let lo = formulas(pr1, pr2, snorm, arithmetic);
    let conservative = GapBounds {
        lb_weak: lo.lb_weak - 2.0 * sn - s1,
        lb_press: lo.lb_press - 1.5 * s2 - 2.0 * s1,
        lb_arith: lo.lb_arith - s1,
        ub_press: lo.ub_press + s1,
        ub_stable: lo.ub_stable + sn,
        best_lb: 0.0,
    };
    let best = if arithmetic {
        conservative.lb_weak.max(conservative.lb_press).max(conservative.lb_arith)
    } else {
        conservative.lb_weak.max(conservative.lb_press)
    };
    Ok(GapReport {
        raw,
        conservative: GapBounds { best_lb: best, ..conservative },
        inputs,
        lb_arith_valid: arithmetic,
        conjectured: 0.5 * (pr2 - 1.0),
    })
}

impl GapReport {
    /// Two-column text table of raw and conservative values.
    pub fn to_text(&self) -> String {
        let rows = [
            ("lb_weak", self.raw.lb_weak, self.conservative.lb_weak),
            ("lb_press", self.raw.lb_press, self.conservative.lb_press),
            ("lb_arith", self.raw.lb_arith, self.conservative.lb_arith),
            ("ub_press", self.raw.ub_press, self.conservative.ub_press),
            ("ub_stable", self.raw.ub_stable, self.conservative.ub_stable),
            ("best_lb", self.raw.best_lb, self.conservative.best_lb),
        ];
        let mut s = format!("{:<10} {:>14} {:>14}\n", "bound", "raw", "conservative");
        for (name, r, c) in rows {
            s.push_str(&format!("{name:<10} {r:>14.6} {c:>14.6}\n"));
        }
        if !self.lb_arith_valid {
            s.push_str("lb_arith: arithmetic-only validity\n");
        }
        s.push_str(&format!("reference (Pr(2w)-1)/2 = {:.6}\n", self.conjectured));
        s
    }
}

/// `snorm − 1/2 − (pr1 − snorm)/(1 − β)`.
pub fn admissible_a(beta: f64, pr1: f64, snorm: f64) -> f64 {
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
    snorm - 0.5 - (pr1 - snorm) / (1.0 - beta)
}

/// `(pr2 − 1)/2 − (2·pr1 − pr2)/(1 − 2β)`.
pub fn admissible_a_press(beta: f64, pr1: f64, pr2: f64) -> f64 {
    assert!(beta > 0.0 && beta < 0.5, "beta must lie in (0, 1/2)");
    0.5 * (pr2 - 1.0) - (2.0 * pr1 - pr2) / (1.0 - 2.0 * beta)
}

/// A record with the largest `ω̄_γ` if that exceeds 3/2.
pub fn nonque_witness<'a>(table: &'a GeodesicTable, form: &HarmonicForm) -> Result<Option<&'a GeodesicRecord>, FormsError> {
    let (avg, rec) = forms::max_average(table, form)?;
    Ok((avg > 1.5).then_some(rec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaValue {
    pub s: Complex64,
    pub log_z: Complex64,
    pub tail_bound: f64,
}

pub const DEFAULT_K_MAX: u32 = 20;

/// `Σ_{k ≤ k_max} Σ_{γ primitive} log(1 − e^{∫_γω} e^{−(s+k)ℓ_γ})`.
///
/// `abscissa` is the convergence abscissa estimate (critical exponent plus
/// slack); `Re s` must exceed it. The tail bound is
/// `e^{−(Re s + k_max + 1)·systole} · W` with `W = Σ_γ e^{∫_γω}` over the
/// table's primitive records, which dominates the first omitted `k` layer.
pub fn zeta_log_truncated(
    table: &GeodesicTable,
    form: &HarmonicForm,
    s: Complex64,
    k_max: u32,
    abscissa: f64,
) -> Result<ZetaValue, BoundsError> {
    form.check_dim(table)?;
    if s.re <= abscissa {
        return Err(BoundsError::OutsideConvergenceRegion { re: s.re, abscissa });
    }
    let mut acc = ComplexKahan::default();
    let mut weight = 0.0;
    for r in table.primitive() {
        let w = forms::integral(form, r)?;
        weight += w.exp();
        for k in 0..=k_max {
            let z = Complex64::new(w, 0.0) - (s + k as f64) * r.length;
            acc.add((Complex64::new(1.0, 0.0) - z.exp()).ln());
        }
    }
    let tail_bound = match table.systole() {
        Some(sys) => (-(s.re + k_max as f64 + 1.0) * sys).exp() * weight / (1.0 - (-sys).exp()),
        None => 0.0,
    };
    Ok(ZetaValue { s, log_z: acc.value(), tail_bound })
}

/// Evaluates on a grid of `s` values in parallel, preserving order.
pub fn zeta_grid(
    table: &GeodesicTable,
    form: &HarmonicForm,
    grid: &[Complex64],
    k_max: u32,
    abscissa: f64,
) -> Result<Vec<ZetaValue>, BoundsError> {
    grid.par_iter().map(|&s| zeta_log_truncated(table, form, s, k_max, abscissa)).collect()
}

/// CSV: `re_s,im_s,re_log_z,im_log_z,tail_bound`.
pub fn write_zeta_csv<W: Write>(values: &[ZetaValue], mut out: W) -> std::io::Result<()> {
    writeln!(out, "re_s,im_s,re_log_z,im_log_z,tail_bound")?;
    for v in values {
        writeln!(out, "{:?},{:?},{:?},{:?},{:?}", v.s.re, v.s.im, v.log_z.re, v.log_z.im, v.tail_bound)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn gap_bound_arithmetic() {
        let r = gap_bounds(2.0, 3.6, 1.8).unwrap().raw;
        assert!(close(r.lb_weak, 1.1) && close(r.lb_press, 0.9) && close(r.lb_arith, 0.75));
        assert!(close(r.best_lb, 1.1));
        let z = gap_bounds(1.0, 1.0, 0.0).unwrap().raw;
        assert!(close(z.lb_weak, -1.5) && close(z.lb_press, -1.0) && close(z.lb_arith, -0.25) && close(z.ub_press, 0.5));
    }

    #[test]
    fn inconsistent_inputs_rejected() {
        assert!(matches!(gap_bounds(0.5, 1.0, 0.0), Err(BoundsError::InconsistentInputs { .. })));
        assert!(matches!(gap_bounds(1.5, 3.0, 2.0), Err(BoundsError::InconsistentInputs { .. })));
        let ok = gap_report(
            GapInputs { pr1: 0.9, pr2: 1.0, snorm: 0.0, slacks: InputSlacks { pr1: 0.15, pr2: 0.1, snorm: 0.0 } },
            false,
        )
        .unwrap();
        assert!(!ok.lb_arith_valid);
        assert!(ok.conservative.lb_weak < ok.raw.lb_weak);
        assert!(ok.to_text().contains("arithmetic-only"));
    }

    #[test]
    fn admissible_strips() {
        assert!(close(admissible_a(0.5, 3.5, 3.0), 1.5));
        assert!(close(admissible_a(0.3, 3.0, 3.0), 2.5) && close(admissible_a(0.9, 3.0, 3.0), 2.5));
        assert!(admissible_a(0.9, 3.5, 3.0) < admissible_a(0.5, 3.5, 3.0));
        assert!(close(admissible_a_press(0.25, 2.0, 3.6), 0.5));
        assert!(close(admissible_a_press(0.1, 2.0, 4.0), 1.5) && close(admissible_a_press(0.4, 2.0, 4.0), 1.5));
        let lim = admissible_a_press(1e-9, 2.0, 3.6);
        assert!((lim - (1.5 * 3.6 - 4.0 - 0.5)).abs() < 1e-8);
    }

    fn rec(w: &str, length: f64, h: i64) -> GeodesicRecord {
        GeodesicRecord { canon: w.parse().unwrap(), length, primitive_length: length, power: 1, homology: vec![h, 0] }
    }

    #[test]
    fn witness_threshold() {
        let t = GeodesicTable::new([0; 32], 5.0, 5.0, 2, vec![rec("a", 2.0, 1), rec("A", 2.0, -1)]);
        assert!(nonque_witness(&t, &HarmonicForm::zero(2)).unwrap().is_none());
        let f = HarmonicForm::new(vec![3.2, 0.0]);
        assert_eq!(nonque_witness(&t, &f).unwrap().unwrap().canon.to_string(), "a");
        assert!(nonque_witness(&t, &HarmonicForm::new(vec![2.9, 0.0])).unwrap().is_none());
        assert!(nonque_witness(&t, &f.scaled(1.5)).unwrap().is_some());
    }

    #[test]
    fn zeta_basics() {
        let empty = GeodesicTable::new([0; 32], 5.0, 5.0, 2, vec![]);
        let z = zeta_log_truncated(&empty, &HarmonicForm::zero(2), Complex64::new(2.0, 1.0), 20, 1.0).unwrap();
        assert_eq!(z.log_z, Complex64::new(0.0, 0.0));

        let t = GeodesicTable::new([0; 32], 5.0, 5.0, 2, vec![rec("a", 2.0, 1)]);
        let f = HarmonicForm::new(vec![0.3, 0.0]);
        let s = Complex64::new(1.5, 0.7);
        let z = zeta_log_truncated(&t, &f, s, 0, 1.0).unwrap();
        let expect = (Complex64::new(1.0, 0.0) - (Complex64::new(0.3, 0.0) - s * 2.0).exp()).ln();
        assert!((z.log_z - expect).norm() < 1e-15);

        let far = zeta_log_truncated(&t, &f, Complex64::new(60.0, 0.0), 20, 1.0).unwrap();
        assert!(far.log_z.norm() < 1e-40);
        let c = zeta_log_truncated(&t, &f, s.conj(), 20, 1.0).unwrap();
        let d = zeta_log_truncated(&t, &f, s, 20, 1.0).unwrap();
        assert!((c.log_z - d.log_z.conj()).norm() < 1e-15);
        assert!(matches!(zeta_log_truncated(&t, &f, Complex64::new(0.5, 0.0), 20, 1.0), Err(BoundsError::OutsideConvergenceRegion { .. })));
    }
}
