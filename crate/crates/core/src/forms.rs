//! Harmonic 1-forms as period vectors.
//!
//! A form is the homomorphism `γ ↦ ∫_γ ω` on the abelianization, given by its
//! value on each generator; `∫_γ ω` is the pairing with a record's homology
//! vector.

use thiserror::Error;

use crate::geodesics::{GeodesicRecord, GeodesicTable, Word};

#[derive(Debug, Error, PartialEq)]
pub enum FormsError {
    #[error("form has {form} periods but homology has dimension {homology}")]
    DimensionMismatch { form: usize, homology: usize },
    #[error("empty geodesic table")]
    EmptyTable,
    #[error("relator has nonzero homology {0:?}; periods are not well defined")]
    RelatorHomology(Vec<i64>),
    #[error("bad period {0:?}: {1}")]
    BadPeriod(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicForm {
    periods: Vec<f64>,
}

impl HarmonicForm {
    pub fn new(periods: Vec<f64>) -> Self {
        HarmonicForm { periods }
    }

    pub fn zero(dim: usize) -> Self {
        HarmonicForm { periods: vec![0.0; dim] }
    }

    /// The form dual to generator `i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut periods = vec![0.0; dim];
        periods[i] = 1.0;
        HarmonicForm { periods }
    }

    /// Parses periods written as decimal strings.
    pub fn from_decimal_strings<S: AsRef<str>>(periods: &[S]) -> Result<Self, FormsError> {
        periods
            .iter()
            .map(|s| {
                let s = s.as_ref();
                s.trim().parse::<f64>().map_err(|e| FormsError::BadPeriod(s.to_string(), e.to_string())).and_then(|x| {
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(FormsError::BadPeriod(s.to_string(), "not finite".into()))
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(HarmonicForm::new)
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        HarmonicForm { periods: self.periods.iter().map(|p| p * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.periods.iter().all(|&p| p == 0.0)
    }

    /// `⟨periods, h⟩`.
    pub fn pair(&self, homology: &[i64]) -> Result<f64, FormsError> {
        if homology.len() != self.periods.len() {
            return Err(FormsError::DimensionMismatch { form: self.periods.len(), homology: homology.len() });
        }
        Ok(self.periods.iter().zip(homology).map(|(p, &h)| p * h as f64).sum())
    }

    pub fn check_dim(&self, table: &GeodesicTable) -> Result<(), FormsError> {
        if table.rank != self.dim() {
            return Err(FormsError::DimensionMismatch { form: self.dim(), homology: table.rank });
        }
        Ok(())
    }
}

/// Fails unless the relator pairs to zero with every form.
pub fn check_relator_homology(relator: &Word, dim: usize) -> Result<(), FormsError> {
    let h = relator.homology(dim);
    if h.iter().any(|&x| x != 0) {
        return Err(FormsError::RelatorHomology(h));
    }
    Ok(())
}

/// `∫_γ ω`.
pub fn integral(form: &HarmonicForm, rec: &GeodesicRecord) -> Result<f64, FormsError> {
    form.pair(&rec.homology)
}

/// `ω̄_γ = ∫_γ ω / ℓ_γ`.
pub fn average(form: &HarmonicForm, rec: &GeodesicRecord) -> Result<f64, FormsError> {
    Ok(integral(form, rec)? / rec.length)
}

/// The record attaining the largest average, first in table order on ties.
pub fn max_average<'a>(table: &'a GeodesicTable, form: &HarmonicForm) -> Result<(f64, &'a GeodesicRecord), FormsError> {
    form.check_dim(table)?;
    let mut best: Option<(f64, &GeodesicRecord)> = None;
    for r in &table.records {
        let a = average(form, r)?;
        if best.is_none_or(|(b, _)| a > b) {
            best = Some((a, r));
        }
    }
    best.ok_or(FormsError::EmptyTable)
}

/// Lower bound for the stable norm: the largest `ω̄_γ` over the table.
pub fn stable_norm_lb(table: &GeodesicTable, form: &HarmonicForm) -> Result<f64, FormsError> {
    max_average(table, form).map(|(a, _)| a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(w: &str, length: f64) -> GeodesicRecord {
        let canon: Word = w.parse().unwrap();
        let (_, k) = crate::geodesics::primitive_decompose(&canon);
        GeodesicRecord { homology: canon.homology(4), canon, length, primitive_length: length / k as f64, power: k }
    }

    #[test]
    fn commutator_integrates_to_zero() {
        let r = rec("abAB", 5.0);
        for p in [[1.0, 2.0, 3.0, 4.0], [-0.5, 0.25, 7.0, 0.0]] {
            assert_eq!(integral(&HarmonicForm::new(p.to_vec()), &r).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_and_power_scaling() {
        let f = HarmonicForm::basis(4, 0);
        assert_eq!(integral(&f, &rec("ab", 3.0)).unwrap(), 1.0);
        let g = rec("ab", 3.0);
        let g3 = rec("ababab", 9.0);
        assert_eq!(integral(&f, &g3).unwrap(), 3.0 * integral(&f, &g).unwrap());
        assert_eq!(average(&f, &g3).unwrap(), average(&f, &g).unwrap());
        assert_eq!(average(&f, &rec("BA", 3.0)).unwrap(), -average(&f, &g).unwrap());
    }

    #[test]
    fn dimension_checked() {
        let f = HarmonicForm::zero(2);
        assert!(matches!(integral(&f, &rec("a", 1.0)), Err(FormsError::DimensionMismatch { .. })));
    }

    #[test]
    fn stable_norm_properties() {
        let t = GeodesicTable::new([0; 32], 5.0, 5.0, 4, vec![rec("a", 2.0), rec("A", 2.0), rec("abAB", 4.0)]);
        let f = HarmonicForm::basis(4, 0);
        assert_eq!(stable_norm_lb(&t, &HarmonicForm::zero(4)).unwrap(), 0.0);
        assert_eq!(stable_norm_lb(&t, &f).unwrap(), 0.5);
        assert_eq!(stable_norm_lb(&t, &f.scaled(3.0)).unwrap(), 1.5);
        assert_eq!(stable_norm_lb(&t, &f.scaled(-1.0)).unwrap(), 0.5);
        let empty = GeodesicTable::new([0; 32], 1.0, 1.0, 4, vec![]);
        assert_eq!(stable_norm_lb(&empty, &f), Err(FormsError::EmptyTable));
    }

    #[test]
    fn decimal_periods() {
        let f = HarmonicForm::from_decimal_strings(&["1.5", " -2", "0", "1e-3"]).unwrap();
        assert_eq!(f.periods(), &[1.5, -2.0, 0.0, 1e-3]);
        assert!(HarmonicForm::from_decimal_strings(&["1,5"]).is_err());
        assert!(HarmonicForm::from_decimal_strings(&["inf"]).is_err());
    }

    #[test]
    fn octagon_relator_pairs_to_zero() {
        let m = crate::surfaces::octagon_group();
        assert!(check_relator_homology(&m.relator, 4).is_ok());
        assert!(check_relator_homology(&"aab".parse().unwrap(), 4).is_err());
    }
}
