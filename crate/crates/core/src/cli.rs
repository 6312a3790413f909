//! Command-line front end: model tabulation, dataset synthesis, fitting,
//! fit subtraction, the full comparison pipeline, and SVG plotting.
//!
//! Flag resolution is uniform: explicit flags override the optional JSON
//! config file, which overrides built-in defaults. Every subcommand's output
//! bytes are a pure function of inputs, flags, and seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::{barrier_extraction, compare, model_sweep, SweepCurve};
use crate::dataio::{dataset_to_csv, read_dataset, synth_dataset, SynthModel};
use crate::error::{Error, Result};
use crate::fitting::{eval_curve, fit, parse_curve, Curve, FitBasis, FitResult};
use crate::grid::{GridScale, GridSpec};
use crate::model::AtomicSystem;
use crate::numfmt::g17;
use crate::plot::{render_svg, PlotSeries};
use crate::units::TimeUnit;

const DEFAULT_IP: f64 = 0.9;
const DEFAULT_ZEFF: f64 = 1.6875;
const DEFAULT_F_MIN: f64 = 0.01;
const DEFAULT_N: usize = 200;
const DEFAULT_Z_LIST: [f64; 2] = [1.0, 1.344];

const MODEL_HEADER: &str = "f_au,delta_z,d_b,tau_a,tau_dion,tau_db,tau_td,tau_ti,xi,lambda";
const CURVE_HEADER: &str = "f_au,value,extrapolated";

/// Tunneling-delay model and data pipeline for attoclock experiments.
#[derive(Debug, Parser)]
#[command(name = "attodelay", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate barrier geometry and delay components over a field grid.
    Model(ModelArgs),
    /// Fit a delay dataset in a 1/F basis and emit the fit as JSON.
    Fit(FitArgs),
    /// Evaluate two fits on a grid and emit their difference as a curve CSV.
    Subtract(SubtractArgs),
    /// Extract the empirical barrier delay and compare it against model curves.
    Compare(CompareArgs),
    /// Generate a synthetic delay dataset from the model.
    Synth(SynthArgs),
    /// Render curve CSVs or a model table as a standalone SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Default)]
struct SharedArgs {
    /// Ionization potential in au (default 0.9, helium).
    #[arg(long)]
    ip: Option<f64>,
    /// Effective charge (default 1.6875, helium).
    #[arg(long)]
    zeff: Option<f64>,
    /// Lower field bound in au.
    #[arg(long)]
    fmin: Option<f64>,
    /// Upper field bound in au.
    #[arg(long)]
    fmax: Option<f64>,
    /// Number of grid points (default 200).
    #[arg(long)]
    n: Option<usize>,
    /// Grid spacing: linear or log (default log).
    #[arg(long)]
    grid: Option<String>,
    /// Output time unit: au or as.
    #[arg(long)]
    units: Option<String>,
    /// Fit basis: inv_f or inv_f_offset (default inv_f_offset).
    #[arg(long)]
    basis: Option<String>,
    /// Seed for synthetic noise (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file, or directory for compare; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include extrapolated points in comparison metrics.
    #[arg(long)]
    allow_extrapolation: bool,
    /// JSON config file mirroring the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Delay dataset CSV.
    input: PathBuf,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Args)]
struct SubtractArgs {
    /// Fit JSON whose curve is the minuend.
    fit_a: PathBuf,
    /// Fit JSON whose curve is subtracted.
    fit_b: PathBuf,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Adiabatically calibrated delay dataset CSV.
    #[arg(long)]
    adiabatic: PathBuf,
    /// Nonadiabatically calibrated delay dataset CSV.
    #[arg(long)]
    nonadiabatic: PathBuf,
    /// Optional Larmor-clock delay dataset CSV.
    #[arg(long)]
    lc: Option<PathBuf>,
    /// Comma-separated effective charges for the model sweep (default 1.0,1.344).
    #[arg(long)]
    zlist: Option<String>,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Model to sample: adiabatic_model, nonadiabatic_model, or barrier_model.
    #[arg(long)]
    model: String,
    /// Gaussian noise sigma in au (default 0, noise-free).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Curve CSVs or model tables to draw.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    shared: SharedArgs,
}

/// Optional JSON config mirroring the shared flags plus zlist.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    ip: Option<f64>,
    zeff: Option<f64>,
    fmin: Option<f64>,
    fmax: Option<f64>,
    n: Option<usize>,
    grid: Option<String>,
    units: Option<String>,
    basis: Option<String>,
    seed: Option<u64>,
    out: Option<String>,
    allow_extrapolation: Option<bool>,
    zlist: Option<String>,
}

/// Flags merged over config over defaults; grid bounds stay optional so each
/// subcommand can supply its own data-driven default.
#[derive(Debug)]
struct Resolved {
    ip: f64,
    zeff: f64,
    fmin: Option<f64>,
    fmax: Option<f64>,
    n: usize,
    scale: GridScale,
    units: Option<TimeUnit>,
    basis: FitBasis,
    seed: u64,
    out: Option<PathBuf>,
    allow_extrapolation: bool,
    zlist: Vec<f64>,
}

fn resolve(shared: &SharedArgs) -> Result<Resolved> {
    let cfg: FileConfig = match &shared.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                message: format!("config: {e}"),
            })?
        }
        None => FileConfig::default(),
    };
    let scale = match shared.grid.as_deref().or(cfg.grid.as_deref()) {
        Some(s) => s.parse()?,
        None => GridScale::Log,
    };
    let units = match shared.units.as_deref().or(cfg.units.as_deref()) {
        Some(s) => Some(s.parse::<TimeUnit>()?),
        None => None,
    };
    let basis = match shared.basis.as_deref().or(cfg.basis.as_deref()) {
        Some(s) => s.parse()?,
        None => FitBasis::InvFOffset,
    };
    let zlist = match cfg.zlist.as_deref() {
        Some(s) => parse_zlist(s)?,
        None => DEFAULT_Z_LIST.to_vec(),
    };
    Ok(Resolved {
        ip: shared.ip.or(cfg.ip).unwrap_or(DEFAULT_IP),
        zeff: shared.zeff.or(cfg.zeff).unwrap_or(DEFAULT_ZEFF),
        fmin: shared.fmin.or(cfg.fmin),
        fmax: shared.fmax.or(cfg.fmax),
        n: shared.n.or(cfg.n).unwrap_or(DEFAULT_N),
        scale,
        units,
        basis,
        seed: shared.seed.or(cfg.seed).unwrap_or(0),
        out: shared.out.clone().or_else(|| cfg.out.map(PathBuf::from)),
        allow_extrapolation: shared.allow_extrapolation || cfg.allow_extrapolation.unwrap_or(false),
        zlist,
    })
}

fn parse_zlist(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| {
            let t = part.trim();
            t.parse::<f64>()
                .map_err(|_| Error::Domain(format!("invalid effective charge '{t}' in zlist")))
        })
        .collect()
}

impl Resolved {
    fn grid_spec(&self, default_min: f64, default_max: f64) -> Result<GridSpec> {
        if self.n < 2 {
            return Err(Error::Domain("grid needs at least 2 points".into()));
        }
        GridSpec::new(
            self.fmin.unwrap_or(default_min),
            self.fmax.unwrap_or(default_max),
            self.n,
            self.scale,
        )
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses the process arguments and runs the chosen subcommand.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Model(args) => cmd_model(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Subtract(args) => cmd_subtract(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn cmd_model(args: &ModelArgs) -> Result<()> {
    let r = resolve(&args.shared)?;
    let sys = AtomicSystem::new(r.ip, r.zeff)?;
    let spec = r.grid_spec(DEFAULT_F_MIN, sys.atomic_field_strength())?;
    let unit = r.units.unwrap_or(TimeUnit::Atomic);
    let factor = unit.from_atomic_factor();
    let mut text = format!("# time_unit: {unit}\n{MODEL_HEADER}\n");
    for f in spec.points() {
        let g = sys.barrier_geometry(f)?;
        let d = sys.delay_breakdown(f)?;
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            g17(f),
            g17(g.delta_z),
            g17(g.d_b),
            g17(d.tau_a * factor),
            g17(d.tau_dion * factor),
            g17(d.tau_db * factor),
            g17(d.tau_td * factor),
            g17(d.tau_ti * factor),
            g17(d.xi),
            g17(d.lambda),
        ));
    }
    emit(r.out.as_deref(), &text)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let r = resolve(&args.shared)?;
    let mut ds = read_dataset(&args.input)?;
    if let Some(unit) = r.units {
        ds = ds.converted_to(unit);
    }
    let result = fit(&ds, r.basis)?;
    emit(r.out.as_deref(), &result.to_json())
}

fn cmd_subtract(args: &SubtractArgs) -> Result<()> {
    let r = resolve(&args.shared)?;
    let fit_a = FitResult::from_json(&std::fs::read_to_string(&args.fit_a)?)?;
    let fit_b = FitResult::from_json(&std::fs::read_to_string(&args.fit_b)?)?;
    if fit_a.time_unit != fit_b.time_unit {
        return Err(Error::UnitMismatch);
    }
    let lo = fit_a.f_min.max(fit_b.f_min);
    let hi = fit_a.f_max.min(fit_b.f_max);
    if !(r.fmin.unwrap_or(lo) < r.fmax.unwrap_or(hi)) {
        return Err(Error::GridMismatch);
    }
    let grid = r.grid_spec(lo, hi)?.points();
    let curve_a = eval_curve(&fit_a, &grid)?;
    let curve_b = eval_curve(&fit_b, &grid)?;
    let mut diff = crate::fitting::subtract_curves(&curve_a, &curve_b)?;
    if let Some(unit) = r.units {
        diff = diff.converted_to(unit);
    }
    emit(r.out.as_deref(), &diff.to_csv())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let mut r = resolve(&args.shared)?;
    if let Some(s) = &args.zlist {
        r.zlist = parse_zlist(s)?;
    }
    let out_dir = r
        .out
        .clone()
        .ok_or_else(|| Error::Domain("compare writes a bundle and requires --out <dir>".into()))?;

    let ad = read_dataset(&args.adiabatic)?.converted_to(TimeUnit::Atomic);
    let non = read_dataset(&args.nonadiabatic)?.converted_to(TimeUnit::Atomic);
    let (ad_lo, ad_hi) = ad.f_range().ok_or(Error::EmptyDataset)?;
    let (non_lo, non_hi) = non.f_range().ok_or(Error::EmptyDataset)?;
    let lo = ad_lo.max(non_lo);
    let hi = ad_hi.min(non_hi);
    if !(r.fmin.unwrap_or(lo) < r.fmax.unwrap_or(hi)) {
        return Err(Error::GridMismatch);
    }
    let grid = r.grid_spec(lo, hi)?.points();

    let mut barrier = barrier_extraction(&ad, &non, r.basis, &grid)?;
    let sys = AtomicSystem::new(r.ip, r.zeff)?;
    let mut models = model_sweep(&sys, &r.zlist, &grid)?;
    for m in &models {
        if !m.dropped.is_empty() {
            eprintln!(
                "warning: {} grid points above the atomic field strength dropped for {}",
                m.dropped.len(),
                m.label
            );
        }
    }
    let mut lc_curve = match &args.lc {
        Some(path) => {
            let lc = read_dataset(path)?.converted_to(TimeUnit::Atomic);
            let lc_fit = fit(&lc, r.basis)?;
            Some(eval_curve(&lc_fit, &grid)?)
        }
        None => None,
    };

    if let Some(unit) = r.units {
        barrier = barrier.converted_to(unit);
        models = models
            .into_iter()
            .map(|m| SweepCurve { curve: m.curve.converted_to(unit), ..m })
            .collect();
        lc_curve = lc_curve.map(|c| c.converted_to(unit));
    }

    let report = compare(&barrier, &models, lc_curve.as_ref(), r.allow_extrapolation)?;
    report.write_bundle(&out_dir)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let r = resolve(&args.shared)?;
    let model: SynthModel = args.model.parse()?;
    let sys = AtomicSystem::new(r.ip, r.zeff)?;
    let spec = r.grid_spec(DEFAULT_F_MIN, sys.atomic_field_strength())?;
    let mut ds = synth_dataset(&sys, model, &spec, args.noise, r.seed)?;
    if let Some(unit) = r.units {
        ds = ds.converted_to(unit);
    }
    emit(r.out.as_deref(), &dataset_to_csv(&ds)?)
}

fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let r = resolve(&args.shared)?;
    let mut series = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)?;
        series.extend(load_series(path, &text)?);
    }
    let svg = render_svg(&series)?;
    emit(r.out.as_deref(), &svg)
}

/// Loads one plot input: a curve CSV becomes a single series labeled by file
/// stem; a model table becomes one series per delay column.
fn load_series(path: &Path, text: &str) -> Result<Vec<PlotSeries>> {
    let header = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if header == CURVE_HEADER {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        return Ok(vec![PlotSeries { label, curve: parse_curve(text)? }]);
    }
    if header == MODEL_HEADER {
        return parse_model_table(text);
    }
    Err(Error::Parse {
        line: 1,
        message: format!("unrecognized plot input header '{header}'"),
    })
}

fn parse_model_table(text: &str) -> Result<Vec<PlotSeries>> {
    // Columns drawn from a model table, with their positions in the header.
    const DELAY_COLUMNS: [(&str, usize); 4] =
        [("tau_dion", 4), ("tau_db", 5), ("tau_td", 6), ("tau_ti", 7)];
    let mut unit = TimeUnit::Atomic;
    let mut f_grid: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); DELAY_COLUMNS.len()];
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("time_unit:") {
                unit = value.trim().parse()?;
            }
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 10 columns, found {}", fields.len()),
            });
        }
        let parse_field = |pos: usize| -> Result<f64> {
            fields[pos].trim().parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid number '{}'", fields[pos]),
            })
        };
        f_grid.push(parse_field(0)?);
        for (slot, (_, pos)) in columns.iter_mut().zip(DELAY_COLUMNS) {
            slot.push(parse_field(pos)?);
        }
    }
    if f_grid.is_empty() {
        return Err(Error::EmptyDataset);
    }
    DELAY_COLUMNS
        .iter()
        .zip(columns)
        .map(|((name, _), values)| {
            let mask = vec![false; f_grid.len()];
            Ok(PlotSeries {
                label: (*name).to_string(),
                curve: Curve::new(f_grid.clone(), values, unit, mask)?,
            })
        })
        .collect()
}
