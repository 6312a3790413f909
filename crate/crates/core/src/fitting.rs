//! Weighted linear least squares in the {1/F, 1} basis, curve evaluation,
//! and curve subtraction.
//!
//! The normal equations are solved in closed form after centering the 1/F
//! regressor, which keeps the 2x2 system well conditioned; coefficients are
//! un-centered afterwards. Weights 1/sigma^2 are applied only when every
//! sample carries a positive sigma, otherwise the fit is unweighted. The
//! covariance is the unscaled inverse normal matrix in the weighted case and
//! the inverse scaled by rss/dof in the unweighted case (zero matrix when
//! dof = 0).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::numfmt::g17;
use crate::units::TimeUnit;

/// Fit model: a/F, or a/F + b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum FitBasis {
    /// Pure 1/F dependence.
    #[serde(rename = "inv_f")]
    InvF,
    /// 1/F plus a constant offset (the default in the CLI).
    #[serde(rename = "inv_f_offset")]
    InvFOffset,
}

impl FitBasis {
    /// Number of free coefficients.
    pub fn n_params(self) -> usize {
        match self {
            FitBasis::InvF => 1,
            FitBasis::InvFOffset => 2,
        }
    }
}

impl fmt::Display for FitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitBasis::InvF => "inv_f",
            FitBasis::InvFOffset => "inv_f_offset",
        })
    }
}

impl FromStr for FitBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inv_f" => Ok(FitBasis::InvF),
            "inv_f_offset" => Ok(FitBasis::InvFOffset),
            other => Err(Error::Domain(format!("unknown fit basis '{other}' (expected inv_f|inv_f_offset)"))),
        }
    }
}

/// Result of a least-squares fit and the data range it is valid on.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FitResult {
    /// Basis the coefficients belong to.
    pub basis: FitBasis,
    /// Coefficient of 1/F (time times field).
    pub a: f64,
    /// Constant offset; 0 for the pure 1/F basis.
    pub b: f64,
    /// Row-major covariance matrix: 1 entry for inv_f, 4 for inv_f_offset.
    pub covariance: Vec<f64>,
    /// Residual sum of squares (weighted when the fit was weighted).
    pub rss: f64,
    /// Degrees of freedom, n_samples - n_params.
    pub dof: usize,
    /// Smallest field strength in the fitted data.
    pub f_min: f64,
    /// Largest field strength in the fitted data.
    pub f_max: f64,
    /// Time unit of the fitted delays (and of a and b).
    pub time_unit: TimeUnit,
}

impl FitResult {
    /// Evaluates the fitted model at one field strength.
    pub fn eval(&self, f: f64) -> f64 {
        self.a / f + self.b
    }

    /// Canonical JSON text (fixed key order, 17-digit numbers).
    pub fn to_json(&self) -> String {
        let cov = self.covariance.iter().map(|c| g17(*c)).collect::<Vec<_>>().join(", ");
        format!(
            "{{\n  \"basis\": \"{}\",\n  \"a\": {},\n  \"b\": {},\n  \"covariance\": [{}],\n  \"rss\": {},\n  \"dof\": {},\n  \"f_min\": {},\n  \"f_max\": {},\n  \"time_unit\": \"{}\"\n}}\n",
            self.basis,
            g17(self.a),
            g17(self.b),
            cov,
            g17(self.rss),
            self.dof,
            g17(self.f_min),
            g17(self.f_max),
            self.time_unit
        )
    }

    /// Parses the JSON form written by `to_json`.
    pub fn from_json(text: &str) -> Result<FitResult> {
        let fr: FitResult = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let expected = fr.basis.n_params() * fr.basis.n_params();
        if fr.covariance.len() != expected {
            return Err(Error::Domain(format!(
                "covariance has {} entries, expected {expected} for basis {}",
                fr.covariance.len(),
                fr.basis
            )));
        }
        if !(fr.f_min > 0.0) || !(fr.f_max >= fr.f_min) {
            return Err(Error::Domain(format!("invalid fit range [{}, {}]", fr.f_min, fr.f_max)));
        }
        Ok(fr)
    }
}

/// A model or fit evaluated on a strictly increasing field grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Field grid in atomic units, strictly increasing, all positive.
    pub f_grid: Vec<f64>,
    /// One value per grid point.
    pub values: Vec<f64>,
    /// Unit of the values.
    pub time_unit: TimeUnit,
    /// True where the point lies outside the source fit's data range.
    pub extrapolated_mask: Vec<bool>,
}

impl Curve {
    /// Builds a curve, validating the grid and the parallel-array lengths.
    pub fn new(f_grid: Vec<f64>, values: Vec<f64>, time_unit: TimeUnit, extrapolated_mask: Vec<bool>) -> Result<Curve> {
        if f_grid.len() != values.len() || f_grid.len() != extrapolated_mask.len() {
            return Err(Error::Domain("curve arrays must have equal lengths".into()));
        }
        validate_grid(&f_grid)?;
        Ok(Curve { f_grid, values, time_unit, extrapolated_mask })
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.f_grid.len()
    }

    /// True when the curve has no points.
    pub fn is_empty(&self) -> bool {
        self.f_grid.is_empty()
    }

    /// Returns a copy with values rescaled into `unit`.
    pub fn converted_to(&self, unit: TimeUnit) -> Curve {
        if unit == self.time_unit {
            return self.clone();
        }
        let factor = self.time_unit.to_atomic_factor() * unit.from_atomic_factor();
        Curve {
            f_grid: self.f_grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            time_unit: unit,
            extrapolated_mask: self.extrapolated_mask.clone(),
        }
    }

    /// Canonical CSV text: time-unit directive, header, 17-digit rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# time_unit: {}\n", self.time_unit));
        out.push_str("f_au,value,extrapolated\n");
        for i in 0..self.f_grid.len() {
            out.push_str(&g17(self.f_grid[i]));
            out.push(',');
            out.push_str(&g17(self.values[i]));
            out.push(',');
            out.push_str(if self.extrapolated_mask[i] { "true" } else { "false" });
            out.push('\n');
        }
        out
    }
}

fn validate_grid(f_grid: &[f64]) -> Result<()> {
    for (i, &f) in f_grid.iter().enumerate() {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Domain(format!("grid point {i} must be positive and finite, got {f}")));
        }
        if i > 0 && !(f > f_grid[i - 1]) {
            return Err(Error::Domain(format!("grid must be strictly increasing at index {i}")));
        }
    }
    Ok(())
}

/// Fits a dataset in its own time unit.
///
/// Requires at least max(n_params, 2) samples (`InsufficientData`) spanning
/// at least 2 distinct field values (`SingularFit`).
pub fn fit(ds: &Dataset, basis: FitBasis) -> Result<FitResult> {
    let n = ds.samples.len();
    let needed = basis.n_params().max(2);
    if n < needed {
        return Err(Error::InsufficientData { needed, got: n });
    }
    for s in &ds.samples {
        if !(s.f > 0.0) || !s.f.is_finite() || !s.delay.is_finite() {
            return Err(Error::Domain(format!("invalid sample (f={}, delay={})", s.f, s.delay)));
        }
        if let Some(sig) = s.sigma {
            if !(sig >= 0.0) || !sig.is_finite() {
                return Err(Error::Domain(format!("invalid sample sigma {sig}")));
            }
        }
    }
    let first_f = ds.samples[0].f;
    if !ds.samples.iter().any(|s| s.f != first_f) {
        return Err(Error::SingularFit);
    }

    let weighted = ds.samples.iter().all(|s| matches!(s.sigma, Some(sig) if sig > 0.0));
    let weights: Vec<f64> = if weighted {
        ds.samples.iter().map(|s| 1.0 / (s.sigma.unwrap() * s.sigma.unwrap())).collect()
    } else {
        vec![1.0; n]
    };
    let u: Vec<f64> = ds.samples.iter().map(|s| 1.0 / s.f).collect();
    let y: Vec<f64> = ds.samples.iter().map(|s| s.delay).collect();

    let (mut f_min, mut f_max) = (ds.samples[0].f, ds.samples[0].f);
    for s in &ds.samples {
        f_min = f_min.min(s.f);
        f_max = f_max.max(s.f);
    }

    let (a, b, covariance, rss, dof) = match basis {
        FitBasis::InvF => {
            let mut suu = 0.0;
            let mut suy = 0.0;
            for i in 0..n {
                suu += weights[i] * u[i] * u[i];
                suy += weights[i] * u[i] * y[i];
            }
            let a = suy / suu;
            let mut rss = 0.0;
            for i in 0..n {
                let r = y[i] - a * u[i];
                rss += weights[i] * r * r;
            }
            let dof = n - 1;
            let cov = if weighted {
                vec![1.0 / suu]
            } else if dof > 0 {
                vec![rss / dof as f64 / suu]
            } else {
                vec![0.0]
            };
            (a, 0.0, cov, rss, dof)
        }
        FitBasis::InvFOffset => {
            let mut sw = 0.0;
            let mut su = 0.0;
            let mut sy = 0.0;
            for i in 0..n {
                sw += weights[i];
            }
            for i in 0..n {
                su += weights[i] * u[i];
            }
            for i in 0..n {
                sy += weights[i] * y[i];
            }
            let ubar = su / sw;
            let ybar = sy / sw;
            let mut suu = 0.0;
            let mut suy = 0.0;
            for i in 0..n {
                let du = u[i] - ubar;
                suu += weights[i] * du * du;
                suy += weights[i] * du * (y[i] - ybar);
            }
            if suu == 0.0 {
                return Err(Error::SingularFit);
            }
            let a = suy / suu;
            let b = ybar - a * ubar;
            let mut rss = 0.0;
            for i in 0..n {
                let r = y[i] - a * u[i] - b;
                rss += weights[i] * r * r;
            }
            let dof = n - 2;
            // Inverse normal matrix in the (a, b) parametrization, from
            // centered sums: var(a) = 1/suu, cov(a,b) = -ubar/suu,
            // var(b) = 1/sw + ubar^2/suu.
            let caa = 1.0 / suu;
            let cab = -ubar / suu;
            let cbb = 1.0 / sw + ubar * ubar / suu;
            let cov = if weighted {
                vec![caa, cab, cab, cbb]
            } else if dof > 0 {
                let s2 = rss / dof as f64;
                vec![s2 * caa, s2 * cab, s2 * cab, s2 * cbb]
            } else {
                vec![0.0; 4]
            };
            (a, b, cov, rss, dof)
        }
    };

    Ok(FitResult { basis, a, b, covariance, rss, dof, f_min, f_max, time_unit: ds.time_unit })
}

/// Evaluates a fit on a grid, flagging points outside the fitted data range.
pub fn eval_curve(fr: &FitResult, f_grid: &[f64]) -> Result<Curve> {
    validate_grid(f_grid)?;
    let values: Vec<f64> = f_grid.iter().map(|&f| fr.eval(f)).collect();
    let mask: Vec<bool> = f_grid.iter().map(|&f| f < fr.f_min || f > fr.f_max).collect();
    Curve::new(f_grid.to_vec(), values, fr.time_unit, mask)
}

/// Pointwise difference of two curves on an identical grid.
///
/// The extrapolation mask of the result is the elementwise OR.
pub fn subtract_curves(minuend: &Curve, subtrahend: &Curve) -> Result<Curve> {
    if minuend.time_unit != subtrahend.time_unit {
        return Err(Error::UnitMismatch);
    }
    if minuend.f_grid.len() != subtrahend.f_grid.len()
        || minuend.f_grid.iter().zip(&subtrahend.f_grid).any(|(a, b)| a != b)
    {
        return Err(Error::GridMismatch);
    }
    let values: Vec<f64> = minuend.values.iter().zip(&subtrahend.values).map(|(m, s)| m - s).collect();
    let mask: Vec<bool> = minuend
        .extrapolated_mask
        .iter()
        .zip(&subtrahend.extrapolated_mask)
        .map(|(m, s)| *m || *s)
        .collect();
    Curve::new(minuend.f_grid.clone(), values, minuend.time_unit, mask)
}

/// Parses the CSV text form of a curve.
pub fn parse_curve(text: &str) -> Result<Curve> {
    let mut time_unit = TimeUnit::Attosecond;
    let mut header_seen = false;
    let mut f_grid = Vec::new();
    let mut values = Vec::new();
    let mut mask = Vec::new();
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
            }
            continue;
        }
        if !header_seen {
            if line.trim() != "f_au,value,extrapolated" {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header 'f_au,value,extrapolated', found '{}'", line.trim()),
                });
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::Parse { line: line_no, message: format!("expected 3 columns, found {}", cells.len()) });
        }
        let f: f64 = cells[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("non-numeric f_au cell '{}'", cells[0].trim()),
        })?;
        let v: f64 = cells[1].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("non-numeric value cell '{}'", cells[1].trim()),
        })?;
        let m = match cells[2].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse { line: line_no, message: format!("expected true|false, found '{other}'") })
            }
        };
        f_grid.push(f);
        values.push(v);
        mask.push(m);
    }

    if !header_seen {
        return Err(Error::Parse { line: line_count + 1, message: "missing header row".into() });
    }
    if f_grid.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Curve::new(f_grid, values, time_unit, mask)
}

/// Reads a curve from a CSV file.
pub fn read_curve(path: &Path) -> Result<Curve> {
    let text = std::fs::read_to_string(path)?;
    parse_curve(&text)
}

/// Writes a curve in canonical CSV form.
pub fn write_curve(curve: &Curve, path: &Path) -> Result<()> {
    std::fs::write(path, curve.to_csv())?;
    Ok(())
}
