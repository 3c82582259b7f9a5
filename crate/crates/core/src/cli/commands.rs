//! Pipeline stages behind the subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::config::RunConfig;
use super::CliError;
use crate::bounds::{self, BoundsError, GapBounds, GapInputs, GapReport, InputSlacks, ZetaValue};
use crate::forms::{self, HarmonicForm};
use crate::geodesics::{self, EnumerateOptions, GeodesicTable, GeodesicsError};
use crate::surfaces::{self, Model, ModelDescriptor};
use crate::thermo::{self, CriticalExponent, PressureEstimate, PressureOptions, ScanPoint, ThermoError};
use crate::traceformula::{
    self, AverageMethod, GeometricSum, LmSum, PaleyWienerFit, SymmetrizedG, TestFunction, TraceError,
};

pub const REPORT_FORMAT: &str = "geospec-report";
pub const REPORT_VERSION: u32 = 1;

impl From<GeodesicsError> for CliError {
    fn from(e: GeodesicsError) -> Self {
        match e {
            GeodesicsError::Io(e) => CliError::Io(e.to_string()),
            GeodesicsError::MemoryBudget { .. } | GeodesicsError::InvalidCutoff(_) => CliError::Config(e.to_string()),
            GeodesicsError::Fuchsian(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::WindowBeyondCertifiedRange { .. } | ThermoError::InsufficientRange { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::DigestMismatch => CliError::Integrity(e.to_string()),
            TraceError::Forms(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::OutsideConvergenceRegion { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<forms::FormsError> for CliError {
    fn from(e: forms::FormsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved inputs shared by every subcommand.
pub struct Context {
    pub cfg: RunConfig,
    pub model: Model,
    pub form: HarmonicForm,
    pub out: PathBuf,
    pub table_path: PathBuf,
}

impl Context {
    pub fn new(cfg: RunConfig, table: Option<&Path>, out: Option<&Path>) -> Result<Context, CliError> {
        let model = cfg.model()?;
        let form = cfg.form(&model)?;
        let out = cfg.out_dir(out);
        let table_path = cfg.table_path(table, &out);
        Ok(Context { cfg, model, form, out, table_path })
    }

    pub fn load_table(&self) -> Result<GeodesicTable, CliError> {
        geodesics::load(&self.table_path, &self.model.digest(), self.model.rank()).map_err(|e| with_path(&self.table_path, e))
    }

    fn pressure_options(&self) -> PressureOptions {
        PressureOptions { halfwidth: self.cfg.pressure.halfwidth, correction: self.cfg.pressure.correction }
    }
}

fn with_path(path: &Path, e: GeodesicsError) -> CliError {
    match e {
        GeodesicsError::Io(e) => io_err(path, e),
        e => e.into(),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::File::create(path).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    create(path)?.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(create(path)?);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub records: usize,
    pub systole: Option<f64>,
    pub cutoff_l: f64,
    pub complete_below: f64,
    pub model_digest: String,
    pub spectrum_label: Option<&'static str>,
}

pub fn table_summary(model: &Model, table: &GeodesicTable) -> TableSummary {
    TableSummary {
        records: table.len(),
        systole: table.systole(),
        cutoff_l: table.cutoff_l,
        complete_below: table.complete_below,
        model_digest: hex(&table.model_digest),
        spectrum_label: match model {
            Model::Arithmetic(a) => Some(a.spectrum_label()),
            Model::Octagon(_) => None,
        },
    }
}

pub fn enumerate_table(ctx: &Context) -> Result<GeodesicTable, CliError> {
    let digest = ctx.model.digest();
    let e = &ctx.cfg.enumerate;
    let table = match &ctx.model {
        Model::Octagon(s) => {
            let opts = EnumerateOptions {
                strategy: e.strategy.into(),
                memory_budget: e.memory_budget_mib.saturating_mul(1 << 20),
                threads: None,
            };
            geodesics::enumerate_with(s, digest, ctx.cfg.cutoff_l, &opts)?
        }
        Model::Arithmetic(a) => geodesics::enumerate_arithmetic(a, digest, ctx.cfg.cutoff_l, e.max_word_len)?,
    };
    Ok(table)
}

pub fn cmd_enumerate(ctx: &Context, out: &mut dyn Write) -> Result<TableSummary, CliError> {
    let table = enumerate_table(ctx)?;
    if let Some(dir) = ctx.table_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    geodesics::save(&table, &ctx.table_path).map_err(|e| with_path(&ctx.table_path, e))?;
    let s = table_summary(&ctx.model, &table);
    let sys = s.systole.map_or("none".to_string(), |x| format!("{x:.12}"));
    writeln!(out, "table {}", ctx.table_path.display())
        .and_then(|_| writeln!(out, "records {}\nsystole {sys}\ncomplete_below {}", s.records, s.complete_below))
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct StableNorm {
    pub lower_bound: f64,
    /// Change of the bound since three quarters of the cutoff.
    pub slack: f64,
    pub witness: String,
}

pub fn stable_norm(table: &GeodesicTable, form: &HarmonicForm) -> Result<StableNorm, CliError> {
    let (lb, rec) = forms::max_average(table, form)?;
    let early = table.truncated(0.75 * table.cutoff_l);
    let slack = match forms::stable_norm_lb(&early, form) {
        Ok(e) => lb - e,
        Err(forms::FormsError::EmptyTable) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    Ok(StableNorm { lower_bound: lb, slack, witness: rec.canon.to_string() })
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowPoint {
    pub t: f64,
    pub pressure: f64,
    pub slack: f64,
    pub n_terms: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PressureSummary {
    pub corrected: bool,
    pub pressure: PressureEstimate,
    pub pressure_2w: PressureEstimate,
    pub critical_exponent: CriticalExponent,
    pub stable_norm: StableNorm,
    pub band_holds: bool,
    pub scan: Vec<ScanPoint>,
    pub by_window: Vec<WindowPoint>,
}

fn require_certified(table: &GeodesicTable, h: f64) -> Result<f64, CliError> {
    let t = thermo::largest_certified_t(table, h);
    if t - h <= 0.0 {
        return Err(CliError::Config(format!(
            "table certifies no window of halfwidth {h} (complete_below = {})",
            table.complete_below
        )));
    }
    Ok(t)
}

pub fn pressure_summary(ctx: &Context, table: &GeodesicTable) -> Result<PressureSummary, CliError> {
    let opts = ctx.pressure_options();
    let h = opts.halfwidth;
    let t = match ctx.cfg.pressure.t {
        Some(t) => t,
        None => require_certified(table, h)?,
    };
    let form = &ctx.form;
    let pressure = thermo::pressure_estimate_with(table, form, t, &opts)?;
    let pressure_2w = thermo::pressure_estimate_with(table, &form.scaled(2.0), t, &opts)?;
    let critical_exponent = thermo::critical_exponent_with(table, form, &opts)?;
    let stable_norm = stable_norm(table, form)?;
    let band_holds = thermo::pressure_band_holds(&pressure, stable_norm.lower_bound);
    let scan = thermo::pressure_limit_scan(table, form, &ctx.cfg.pressure.scales, &opts)?;
    let mut by_window = Vec::new();
    let mut c = h;
    while c <= thermo::largest_certified_t(table, h) + 1e-12 {
        match thermo::pressure_estimate_with(table, form, c, &opts) {
            Ok(p) => by_window.push(WindowPoint { t: c, pressure: p.value, slack: p.slack, n_terms: p.n_terms }),
            Err(ThermoError::EmptyWindow { .. }) | Err(ThermoError::NoConvergence(_)) => {}
            Err(e) => return Err(e.into()),
        }
        c += 2.0 * h;
    }
    Ok(PressureSummary {
        corrected: opts.correction,
        pressure,
        pressure_2w,
        critical_exponent,
        stable_norm,
        band_holds,
        scan,
        by_window,
    })
}

fn write_pressure_csv(path: &Path, rows: &[WindowPoint]) -> Result<(), CliError> {
    write_with(path, |w| {
        writeln!(w, "t,pressure,slack,n_terms")?;
        for r in rows {
            writeln!(w, "{:?},{:?},{:?},{}", r.t, r.pressure, r.slack, r.n_terms)?;
        }
        Ok(())
    })
}

pub fn cmd_pressure(ctx: &Context, out: &mut dyn Write) -> Result<PressureSummary, CliError> {
    let table = ctx.load_table()?;
    let p = pressure_summary(ctx, &table)?;
    write_json(&ctx.out.join("pressure.json"), &p)?;
    write_pressure_csv(&ctx.out.join("pressure_vs_t.csv"), &p.by_window)?;
    writeln!(
        out,
        "pressure {:.6} slack {:.6} (t = {}, {} terms)\ncritical_exponent {:.6} slack {:.6}\nstable_norm_lb {:.6} ({})\nband_holds {}",
        p.pressure.value,
        p.pressure.slack,
        p.pressure.t,
        p.pressure.n_terms,
        p.critical_exponent.value,
        p.critical_exponent.slack,
        p.stable_norm.lower_bound,
        p.stable_norm.witness,
        p.band_holds
    )
    .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissiblePoint {
    pub beta: f64,
    pub a: f64,
    pub a_press: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundScanRow {
    pub scale: f64,
    pub pr1: f64,
    pub pr2: f64,
    pub snorm: f64,
    #[serde(flatten)]
    pub bounds: GapBounds,
    /// `2·snorm + pr1 − 1.5·pr2`.
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSummary {
    pub gap_report: GapReport,
    pub admissible: Vec<AdmissiblePoint>,
    pub nonque_witness: Option<String>,
    pub scan: Vec<BoundScanRow>,
}

pub fn bounds_summary(ctx: &Context, table: &GeodesicTable, p: &PressureSummary) -> Result<BoundsSummary, CliError> {
    let arithmetic = ctx.model.is_arithmetic();
    let sn = &p.stable_norm;
    let inputs = GapInputs {
        pr1: p.pressure.value,
        pr2: p.pressure_2w.value,
        snorm: sn.lower_bound,
        slacks: InputSlacks { pr1: p.pressure.slack, pr2: p.pressure_2w.slack, snorm: sn.slack },
    };
    let gap_report = bounds::gap_report(inputs, arithmetic)?;
    let admissible = ctx
        .cfg
        .bounds
        .betas
        .iter()
        .map(|&beta| AdmissiblePoint {
            beta,
            a: bounds::admissible_a(beta, inputs.pr1, inputs.snorm),
            a_press: bounds::admissible_a_press(beta, inputs.pr1, inputs.pr2),
        })
        .collect();
    let nonque_witness = bounds::nonque_witness(table, &ctx.form)?.map(|r| r.canon.to_string());
    let opts = ctx.pressure_options();
    let t = p.pressure.t;
    let mut scan = Vec::new();
    for &s in &ctx.cfg.pressure.scales {
        let pr1 = thermo::pressure_estimate_with(table, &ctx.form.scaled(s), t, &opts)?.value;
        let pr2 = thermo::pressure_estimate_with(table, &ctx.form.scaled(2.0 * s), t, &opts)?.value;
        let snorm = s.abs() * sn.lower_bound;
        scan.push(BoundScanRow {
            scale: s,
            pr1,
            pr2,
            snorm,
            bounds: bounds::formulas(pr1, pr2, snorm, arithmetic),
            difference: 2.0 * snorm + pr1 - 1.5 * pr2,
        });
    }
    Ok(BoundsSummary { gap_report, admissible, nonque_witness, scan })
}

fn write_bounds_csv(path: &Path, rows: &[BoundScanRow]) -> Result<(), CliError> {
    write_with(path, |w| {
        writeln!(w, "scale,pr1,pr2,snorm,lb_weak,lb_press,lb_arith,ub_press,ub_stable,difference")?;
        for r in rows {
            let b = &r.bounds;
            writeln!(
                w,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.scale, r.pr1, r.pr2, r.snorm, b.lb_weak, b.lb_press, b.lb_arith, b.ub_press, b.ub_stable, r.difference
            )?;
        }
        Ok(())
    })
}

pub fn cmd_bounds(ctx: &Context, out: &mut dyn Write) -> Result<BoundsSummary, CliError> {
    let table = ctx.load_table()?;
    let p = pressure_summary(ctx, &table)?;
    let b = bounds_summary(ctx, &table, &p)?;
    write_json(&ctx.out.join("bounds.json"), &b)?;
    write_bounds_csv(&ctx.out.join("bounds_vs_scale.csv"), &b.scan)?;
    write!(out, "{}", b.gap_report.to_text()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(b)
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussRow {
    pub t: f64,
    pub sigma: f64,
    pub i_direct: f64,
    pub i_quadrature: f64,
    pub diagonal_bound: f64,
    /// `I / e^{(Pr̂(2ω) − 1)t}`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaleyWienerCheck {
    pub test_function: TestFunction,
    pub fit: PaleyWienerFit,
    pub refined: PaleyWienerFit,
    pub relative_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceTerm {
    pub test_function: TestFunction,
    pub geometric: GeometricSum,
    pub identity: Option<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub terms: Vec<TraceTerm>,
    pub gaussian: Vec<GaussRow>,
    pub paley_wiener: Vec<PaleyWienerCheck>,
}

fn t_grid(ctx: &Context, table: &GeodesicTable) -> Vec<f64> {
    if let Some(g) = &ctx.cfg.trace_sum.t_grid {
        return g.clone();
    }
    let lo = table.systole().unwrap_or(1.0).ceil().max(1.0) as i64;
    let hi = (table.complete_below - 1.0).floor() as i64;
    (lo..=hi).map(|t| t as f64).collect()
}

pub fn gaussian_grid(ctx: &Context, table: &GeodesicTable, pr2: Option<f64>) -> Result<Vec<GaussRow>, CliError> {
    let mut rows = Vec::new();
    for t in t_grid(ctx, table) {
        let diagonal_bound = traceformula::diagonal_bound(table, &ctx.form, t)?;
        for &sigma in &ctx.cfg.trace_sum.sigmas {
            let i_direct = traceformula::gaussian_average(table, &ctx.form, t, sigma, AverageMethod::Direct)?;
            let i_quadrature = traceformula::gaussian_average(table, &ctx.form, t, sigma, AverageMethod::Quadrature)?;
            let ratio = pr2.map(|p| i_direct / ((p - 1.0) * t).exp());
            rows.push(GaussRow { t, sigma, i_direct, i_quadrature, diagonal_bound, ratio });
        }
    }
    Ok(rows)
}

pub fn paley_wiener_grid(ctx: &Context) -> Vec<PaleyWienerCheck> {
    let ts = &ctx.cfg.trace_sum;
    ts.test_functions
        .iter()
        .map(|&f| {
            let g = SymmetrizedG::new(f);
            let fit = traceformula::paley_wiener_fit(&g, ts.paley_wiener_m, ts.paley_wiener_points);
            let refined = traceformula::paley_wiener_fit(&g, ts.paley_wiener_m, 2 * ts.paley_wiener_points);
            let relative_change = (refined.constant - fit.constant).abs() / fit.constant;
            PaleyWienerCheck { test_function: f, fit, refined, relative_change }
        })
        .collect()
}

pub fn trace_summary(ctx: &Context, table: &GeodesicTable, pr2: Option<f64>) -> Result<TraceSummary, CliError> {
    let mut terms = Vec::new();
    for &f in &ctx.cfg.trace_sum.test_functions {
        let g = SymmetrizedG::new(f);
        let geometric = traceformula::geometric_sum(table, &ctx.form, &g)?;
        let identity = match ctx.model.volume() {
            Some(v) if ctx.cfg.trace_sum.identity => Some(traceformula::identity_term(v, &g)),
            _ => None,
        };
        terms.push(TraceTerm { test_function: f, geometric, identity });
    }
    Ok(TraceSummary { terms, gaussian: gaussian_grid(ctx, table, pr2)?, paley_wiener: paley_wiener_grid(ctx) })
}

fn write_gaussian_csv(path: &Path, rows: &[GaussRow]) -> Result<(), CliError> {
    write_with(path, |w| {
        writeln!(w, "t,sigma,I_direct,I_quadrature,diagonal_bound")?;
        for r in rows {
            writeln!(w, "{:?},{:?},{:?},{:?},{:?}", r.t, r.sigma, r.i_direct, r.i_quadrature, r.diagonal_bound)?;
        }
        Ok(())
    })
}

pub fn cmd_trace_sum(ctx: &Context, out: &mut dyn Write) -> Result<TraceSummary, CliError> {
    let table = ctx.load_table()?;
    let pr2 = require_certified(&table, ctx.cfg.pressure.halfwidth)
        .ok()
        .map(|t| thermo::pressure_estimate_with(&table, &ctx.form.scaled(2.0), t, &ctx.pressure_options()))
        .transpose()?
        .map(|p| p.value);
    let s = trace_summary(ctx, &table, pr2)?;
    write_json(&ctx.out.join("trace_sum.json"), &s)?;
    write_gaussian_csv(&ctx.out.join("gaussian_average.csv"), &s.gaussian)?;
    for t in &s.terms {
        let id = t.identity.map_or(String::new(), |v| format!(" identity {:.12e}", v.re));
        let warn = t.geometric.warning.as_deref().map_or(String::new(), |w| format!(" [{w}]"));
        writeln!(out, "{:?}: geometric {:.12e}{id}{warn}", t.test_function, t.geometric.value.re)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(s)
}

pub fn zeta_values(ctx: &Context, table: &GeodesicTable) -> Result<Vec<ZetaValue>, CliError> {
    let ce = thermo::critical_exponent_with(table, &ctx.form, &ctx.pressure_options())?;
    let abscissa = ce.value + ce.slack;
    if !abscissa.is_finite() {
        return Err(CliError::Numeric("critical exponent slack is unbounded; no convergence abscissa".into()));
    }
    let z = &ctx.cfg.zeta;
    let re = z.re.clone().unwrap_or_else(|| vec![abscissa + 0.5, abscissa + 1.0, abscissa + 2.0]);
    let grid: Vec<Complex64> = re.iter().flat_map(|&x| z.im.iter().map(move |&y| Complex64::new(x, y))).collect();
    Ok(bounds::zeta_grid(table, &ctx.form, &grid, z.k_max, abscissa)?)
}

pub fn cmd_zeta(ctx: &Context, out: &mut dyn Write) -> Result<Vec<ZetaValue>, CliError> {
    let table = ctx.load_table()?;
    let v = zeta_values(ctx, &table)?;
    let path = ctx.out.join("zeta.csv");
    write_with(&path, |w| bounds::write_zeta_csv(&v, w))?;
    writeln!(out, "{} zeta values written to {}", v.len(), path.display()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct ArithmeticSummary {
    pub spectrum_label: &'static str,
    pub lm: Vec<LmSum>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub version: u32,
    pub model: ModelDescriptor,
    pub periods: Vec<String>,
    pub table: TableSummary,
    pub pressure: Option<PressureSummary>,
    pub bounds: Option<BoundsSummary>,
    pub trace: TraceSummary,
    pub arithmetic: Option<ArithmeticSummary>,
}

pub fn build_report(ctx: &Context, table: &GeodesicTable) -> Result<Report, CliError> {
    let certified = require_certified(table, ctx.cfg.pressure.halfwidth).is_ok();
    let pressure = if certified { Some(pressure_summary(ctx, table)?) } else { None };
    let bounds = pressure.as_ref().map(|p| bounds_summary(ctx, table, p)).transpose()?;
    let trace = trace_summary(ctx, table, pressure.as_ref().map(|p| p.pressure_2w.value))?;
    let arithmetic = match &ctx.model {
        Model::Arithmetic(a) => {
            let mut lm = Vec::new();
            for m in 2u64.. {
                if surfaces::xm(m).expect("m ≥ 2").value() > table.cutoff_l {
                    break;
                }
                lm.push(traceformula::arithmetic_lm(table, &ctx.model, &ctx.form, m)?);
            }
            Some(ArithmeticSummary { spectrum_label: a.spectrum_label(), lm })
        }
        Model::Octagon(_) => None,
    };
    Ok(Report {
        format: REPORT_FORMAT,
        version: REPORT_VERSION,
        model: ctx.model.descriptor(),
        periods: ctx.cfg.periods.clone(),
        table: table_summary(&ctx.model, table),
        pressure,
        bounds,
        trace,
        arithmetic,
    })
}

pub fn cmd_report(ctx: &Context, out: &mut dyn Write) -> Result<Report, CliError> {
    let table = ctx.load_table()?;
    let r = build_report(ctx, &table)?;
    let path = ctx.out.join("report.json");
    write_json(&path, &r)?;
    write_gaussian_csv(&ctx.out.join("gaussian_average.csv"), &r.trace.gaussian)?;
    if let Some(p) = &r.pressure {
        write_pressure_csv(&ctx.out.join("pressure_vs_t.csv"), &p.by_window)?;
    }
    if let Some(b) = &r.bounds {
        write_bounds_csv(&ctx.out.join("bounds_vs_scale.csv"), &b.scan)?;
        write!(out, "{}", b.gap_report.to_text()).map_err(|e| CliError::Io(e.to_string()))?;
    }
    writeln!(out, "report written to {}", path.display()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(r)
}
