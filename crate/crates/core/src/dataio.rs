//! Dataset ingestion, canonical CSV output, and synthetic-data generation.
//!
//! The CSV schema is the interchange contract for experimental delay data:
//! '#' directive lines ("# time_unit: au|as", "# calibration: ...",
//! "# label: <text>"), a "f_au,delay,sigma" header (sigma column optional),
//! then plain numeric rows. Field strengths are always stored in atomic
//! units; only the delay unit is declared. Writing uses 17-significant-digit
//! numbers so read(write(ds)) reproduces ds bit for bit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::AtomicSystem;
use crate::numfmt::g17;
use crate::units::TimeUnit;

/// Field-calibration provenance of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibration {
    /// Adiabatic field calibration.
    Adiabatic,
    /// Nonadiabatic field calibration.
    Nonadiabatic,
    /// Larmor-clock derived curve.
    LarmorClock,
    /// Generated from the model by `synth_dataset`.
    Synthetic,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Adiabatic => "adiabatic",
            Calibration::Nonadiabatic => "nonadiabatic",
            Calibration::LarmorClock => "larmor_clock",
            Calibration::Synthetic => "synthetic",
        })
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adiabatic" => Ok(Calibration::Adiabatic),
            "nonadiabatic" => Ok(Calibration::Nonadiabatic),
            "larmor_clock" => Ok(Calibration::LarmorClock),
            "synthetic" => Ok(Calibration::Synthetic),
            other => Err(Error::Domain(format!(
                "unknown calibration '{other}' (expected adiabatic|nonadiabatic|larmor_clock|synthetic)"
            ))),
        }
    }
}

/// One measured or synthesized point: field strength in au, delay in the
/// dataset's unit, optional 1-sigma uncertainty in the same unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Field strength, atomic units; always positive.
    pub f: f64,
    /// Delay in the dataset's declared time unit.
    pub delay: f64,
    /// Optional nonnegative uncertainty, same unit as delay.
    pub sigma: Option<f64>,
}

/// Ordered collection of samples with unit and calibration metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Field-calibration provenance.
    pub calibration: Calibration,
    /// Unit of the delay (and sigma) column.
    pub time_unit: TimeUnit,
    /// Free-text label; single line, no surrounding whitespace.
    pub label: String,
    /// Samples in file order; duplicates in f are allowed.
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Smallest and largest field strength present; None when empty.
    pub fn f_range(&self) -> Option<(f64, f64)> {
        let mut it = self.samples.iter().map(|s| s.f);
        let first = it.next()?;
        let mut lo = first;
        let mut hi = first;
        for f in it {
            lo = lo.min(f);
            hi = hi.max(f);
        }
        Some((lo, hi))
    }

    /// Returns a copy with delay and sigma rescaled into `unit`.
    pub fn converted_to(&self, unit: TimeUnit) -> Dataset {
        if unit == self.time_unit {
            return self.clone();
        }
        let factor = self.time_unit.to_atomic_factor() * unit.from_atomic_factor();
        Dataset {
            calibration: self.calibration,
            time_unit: unit,
            label: self.label.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| Sample { f: s.f, delay: s.delay * factor, sigma: s.sigma.map(|x| x * factor) })
                .collect(),
        }
    }
}

/// Generating function for synthetic datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthModel {
    /// Forward-channel delay tau_td.
    Adiabatic,
    /// Tunnel-ionization delay tau_dion.
    Nonadiabatic,
    /// Barrier time-delay tau_db.
    Barrier,
}

impl fmt::Display for SynthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthModel::Adiabatic => "adiabatic_model",
            SynthModel::Nonadiabatic => "nonadiabatic_model",
            SynthModel::Barrier => "barrier_model",
        })
    }
}

impl FromStr for SynthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adiabatic_model" => Ok(SynthModel::Adiabatic),
            "nonadiabatic_model" => Ok(SynthModel::Nonadiabatic),
            "barrier_model" => Ok(SynthModel::Barrier),
            other => Err(Error::Domain(format!(
                "unknown synthesis model '{other}' (expected adiabatic_model|nonadiabatic_model|barrier_model)"
            ))),
        }
    }
}

/// Parses the CSV text form of a dataset; line numbers in errors are 1-based.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut calibration = Calibration::Adiabatic;
    let mut time_unit = TimeUnit::Attosecond;
    let mut label = String::new();
    let mut header: Option<bool> = None; // Some(has_sigma) once seen
    let mut samples = Vec::new();
    let mut line_count = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        line_count = line_no;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            if let Some(value) = rest.strip_prefix("time_unit:") {
                time_unit = value.trim().parse().map_err(|e: Error| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            } else if let Some(value) = rest.strip_prefix("calibration:") {
                calibration = value.trim().parse().map_err(|e: Error| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            } else if let Some(value) = rest.strip_prefix("label:") {
                label = value.trim().to_string();
            }
            // Any other '#' line is a plain comment.
            continue;
        }
        match header {
            None => {
                header = match line.trim() {
                    "f_au,delay,sigma" => Some(true),
                    "f_au,delay" => Some(false),
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("expected header 'f_au,delay[,sigma]', found '{other}'"),
                        })
                    }
                };
            }
            Some(has_sigma) => {
                samples.push(parse_row(line, line_no, has_sigma)?);
            }
        }
    }

    if header.is_none() {
        return Err(Error::Parse { line: line_count + 1, message: "missing header row".into() });
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset { calibration, time_unit, label, samples })
}

fn parse_row(line: &str, line_no: usize, has_sigma: bool) -> Result<Sample> {
    let cells: Vec<&str> = line.split(',').collect();
    let expected = if has_sigma { 3 } else { 2 };
    if cells.len() != expected {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected {expected} columns, found {}", cells.len()),
        });
    }
    let f = parse_cell(cells[0], line_no, "f_au")?;
    if !(f > 0.0) {
        return Err(Error::Parse { line: line_no, message: format!("field strength must be positive, got {f}") });
    }
    let delay = parse_cell(cells[1], line_no, "delay")?;
    let sigma = if has_sigma {
        let cell = cells[2].trim();
        if cell.is_empty() {
            None
        } else {
            let s = parse_cell(cell, line_no, "sigma")?;
            if s < 0.0 {
                return Err(Error::Parse { line: line_no, message: format!("sigma must be nonnegative, got {s}") });
            }
            Some(s)
        }
    } else {
        None
    };
    Ok(Sample { f, delay, sigma })
}

fn parse_cell(cell: &str, line_no: usize, column: &str) -> Result<f64> {
    let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("non-numeric {column} cell '{}'", cell.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse { line: line_no, message: format!("non-finite {column} cell '{}'", cell.trim()) });
    }
    Ok(value)
}

/// Renders a dataset in canonical CSV form (directives, header, 17-digit rows).
pub fn dataset_to_csv(ds: &Dataset) -> Result<String> {
    if ds.samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.label.contains('\n') || ds.label.contains('\r') || ds.label != ds.label.trim() {
        return Err(Error::Domain("dataset label must be a single trimmed line".into()));
    }
    let has_sigma = ds.samples.iter().any(|s| s.sigma.is_some());
    let mut out = String::new();
    out.push_str(&format!("# time_unit: {}\n", ds.time_unit));
    out.push_str(&format!("# calibration: {}\n", ds.calibration));
    if !ds.label.is_empty() {
        out.push_str(&format!("# label: {}\n", ds.label));
    }
    out.push_str(if has_sigma { "f_au,delay,sigma\n" } else { "f_au,delay\n" });
    for s in &ds.samples {
        out.push_str(&g17(s.f));
        out.push(',');
        out.push_str(&g17(s.delay));
        if has_sigma {
            out.push(',');
            if let Some(sig) = s.sigma {
                out.push_str(&g17(sig));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Reads a dataset from a CSV file.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text)
}

/// Writes a dataset in canonical CSV form.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let text = dataset_to_csv(ds)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Generates a dataset from the model with optional Gaussian noise.
///
/// Delays are model(F) + Normal(0, noise_sigma) drawn from a ChaCha8 stream
/// seeded with `seed`, in grid order; the sigma column records noise_sigma.
/// Times are in atomic units and the calibration tag is `synthetic`.
pub fn synth_dataset(
    sys: &AtomicSystem,
    model: SynthModel,
    grid: &GridSpec,
    noise_sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::Domain(format!("noise sigma must be nonnegative, got {noise_sigma}")));
    }
    let f_a = sys.atomic_field_strength();
    if grid.f_max() > f_a {
        return Err(Error::Domain(format!(
            "synthesis grid extends to {} above the atomic field strength {}",
            grid.f_max(),
            f_a
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(grid.n());
    for f in grid.points() {
        let d = sys.delay_breakdown(f)?;
        let value = match model {
            SynthModel::Adiabatic => d.tau_td,
            SynthModel::Nonadiabatic => d.tau_dion,
            SynthModel::Barrier => d.tau_db,
        };
        let noise = if noise_sigma > 0.0 {
            let eps: f64 = rng.sample(StandardNormal);
            noise_sigma * eps
        } else {
            0.0
        };
        samples.push(Sample { f, delay: value + noise, sigma: Some(noise_sigma) });
    }
    Ok(Dataset {
        calibration: Calibration::Synthetic,
        time_unit: TimeUnit::Atomic,
        label: format!("synthetic {} ip={} zeff={}", model, sys.ip(), sys.z_eff()),
        samples,
    })
}
