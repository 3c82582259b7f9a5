//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::forms::HarmonicForm;
use crate::geodesics::Strategy;
use crate::surfaces::{Model, ModelDescriptor};
use crate::traceformula::TestFunction;

pub const THREADS_ENV: &str = "GEOSPEC_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelDescriptor,
    /// Periods of ω on the generators, as decimal strings.
    pub periods: Vec<String>,
    pub cutoff_l: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub enumerate: EnumerateSection,
    #[serde(default)]
    pub pressure: PressureSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub trace_sum: TraceSection,
    #[serde(default)]
    pub zeta: ZetaSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Dfs,
    Bfs,
}

impl From<StrategyName> for Strategy {
    fn from(s: StrategyName) -> Strategy {
        match s {
            StrategyName::Dfs => Strategy::DepthFirst,
            StrategyName::Bfs => Strategy::BreadthFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerateSection {
    pub strategy: StrategyName,
    pub memory_budget_mib: u64,
    /// Word-length limit of the arithmetic search.
    pub max_word_len: usize,
}

impl Default for EnumerateSection {
    fn default() -> Self {
        EnumerateSection { strategy: StrategyName::Dfs, memory_budget_mib: 1024, max_word_len: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSection {
    pub halfwidth: f64,
    /// Window centre; the largest certified one when absent.
    pub t: Option<f64>,
    pub correction: bool,
    pub scales: Vec<f64>,
}

impl Default for PressureSection {
    fn default() -> Self {
        PressureSection { halfwidth: 0.5, t: None, correction: true, scales: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub betas: Vec<f64>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { betas: vec![0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub test_functions: Vec<TestFunction>,
    /// Window centres of the `I(t, σ)` grid; every certified integer when
    /// absent.
    pub t_grid: Option<Vec<f64>>,
    pub sigmas: Vec<f64>,
    pub identity: bool,
    pub paley_wiener_m: i32,
    pub paley_wiener_points: usize,
}

impl Default for TraceSection {
    fn default() -> Self {
        TraceSection {
            test_functions: vec![TestFunction::BumpScaled { eps: 0.5, d: 3.0 }, TestFunction::Modulated { t: 4.0, xi: 2.0 }],
            t_grid: None,
            sigmas: vec![0.5, 1.0, 2.0],
            identity: false,
            paley_wiener_m: 3,
            paley_wiener_points: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaSection {
    /// Real parts; offsets `0.5, 1, 2` beyond the abscissa when absent.
    pub re: Option<Vec<f64>>,
    pub im: Vec<f64>,
    pub k_max: u32,
}

impl Default for ZetaSection {
    fn default() -> Self {
        ZetaSection { re: None, im: vec![0.0, 1.0, 2.0, 5.0, 10.0], k_max: crate::bounds::DEFAULT_K_MAX }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.cutoff_l.is_finite() && self.cutoff_l > 0.0) {
            return bad(format!("cutoff_l must be positive, got {}", self.cutoff_l));
        }
        let p = &self.pressure;
        if !(p.halfwidth > 0.0 && p.halfwidth.is_finite()) {
            return bad(format!("pressure.halfwidth must be positive, got {}", p.halfwidth));
        }
        if p.scales.iter().any(|s| !s.is_finite()) {
            return bad("pressure.scales must be finite".into());
        }
        if let Some(b) = self.bounds.betas.iter().find(|b| !(**b > 0.0 && **b < 0.5)) {
            return bad(format!("bounds.betas must lie in (0, 1/2), got {b}"));
        }
        if let Some(s) = self.trace_sum.sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return bad(format!("trace_sum.sigmas must be positive, got {s}"));
        }
        for f in &self.trace_sum.test_functions {
            if let TestFunction::BumpScaled { eps, d } = *f {
                if !(eps > 0.0 && eps.is_finite() && d.is_finite()) {
                    return bad(format!("bad bump parameters eps = {eps}, d = {d}"));
                }
            }
        }
        if self.trace_sum.paley_wiener_points < 2 {
            return bad("trace_sum.paley_wiener_points must be at least 2".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        Model::from_descriptor(&self.model).map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn form(&self, model: &Model) -> Result<HarmonicForm, CliError> {
        let form = HarmonicForm::from_decimal_strings(&self.periods).map_err(|e| CliError::Config(format!("periods: {e}")))?;
        if form.dim() != model.rank() {
            return Err(CliError::Config(format!("periods: expected {} values, got {}", model.rank(), form.dim())));
        }
        Ok(form)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf).or_else(|| self.out.clone()).unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn table_path(&self, flag: Option<&Path>, out: &Path) -> PathBuf {
        flag.map(Path::to_path_buf).or_else(|| self.table.clone()).unwrap_or_else(|| out.join("table.geos"))
    }
}

/// Flag, then config, then the environment.
pub fn resolve_threads(flag: Option<usize>, cfg: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag.or(cfg) {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"{"model": {"kind": "octagon"}, "periods": ["0", "0", "0", "0"], "cutoff_l": 6.0}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MIN).unwrap();
        assert_eq!(c.pressure, PressureSection::default());
        assert_eq!(c.enumerate.strategy, StrategyName::Dfs);
        let m = c.model().unwrap();
        assert!(c.form(&m).unwrap().is_zero());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::parse(r#"{"model": {"kind": "octagon"}, "periods": [], "cutoff_l": 6.0, "extra": 1}"#).unwrap_err();
        assert!(matches!(e, CliError::Config(ref m) if m.contains("extra")), "{e}");
        let e = RunConfig::parse(
            r#"{"model": {"kind": "octagon"}, "periods": [], "cutoff_l": 6.0, "pressure": {"halfwidht": 1}}"#,
        )
        .unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = RunConfig::parse("{\n  \"model\": {\"kind\": \"octagon\"},\n  \"periods\": [\"0\",]\n}").unwrap_err();
        match e {
            CliError::Config(m) => assert!(m.contains("line 3 column"), "{m}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn periods_checked_against_rank() {
        let c = RunConfig::parse(r#"{"model": {"kind": "octagon"}, "periods": ["1", "0"], "cutoff_l": 6.0}"#).unwrap();
        let m = c.model().unwrap();
        assert!(matches!(c.form(&m), Err(CliError::Config(_))));
        let c = RunConfig::parse(r#"{"model": {"kind": "octagon"}, "periods": ["1", "x", "0", "0"], "cutoff_l": 6.0}"#)
            .unwrap();
        assert!(matches!(c.form(&m), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_values_rejected() {
        for bad in [
            r#"{"model": {"kind": "octagon"}, "periods": [], "cutoff_l": -1}"#,
            r#"{"model": {"kind": "octagon"}, "periods": [], "cutoff_l": 6, "bounds": {"betas": [0.7]}}"#,
            r#"{"model": {"kind": "octagon"}, "periods": [], "cutoff_l": 6, "threads": 0}"#,
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }
}
