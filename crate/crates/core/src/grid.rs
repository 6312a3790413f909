//! Field-strength grids: linear or logarithmic spacing over a positive range.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Spacing rule for a field grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    /// Equal steps in F.
    Linear,
    /// Equal steps in log F.
    Log,
}

impl fmt::Display for GridScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridScale::Linear => "linear",
            GridScale::Log => "log",
        })
    }
}

impl FromStr for GridScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GridScale::Linear),
            "log" => Ok(GridScale::Log),
            other => Err(Error::Domain(format!("unknown grid scale '{other}' (expected linear|log)"))),
        }
    }
}

/// A validated grid specification; `points` materializes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    f_min: f64,
    f_max: f64,
    n: usize,
    scale: GridScale,
}

impl GridSpec {
    /// Builds a grid spec. A single-point grid requires f_min == f_max;
    /// otherwise f_min < f_max and both must be positive and finite.
    pub fn new(f_min: f64, f_max: f64, n: usize, scale: GridScale) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("grid needs at least 1 point".into()));
        }
        if !(f_min > 0.0) || !f_min.is_finite() || !f_max.is_finite() {
            return Err(Error::Domain(format!("grid bounds must be positive and finite, got [{f_min}, {f_max}]")));
        }
        if n == 1 {
            if f_min != f_max {
                return Err(Error::Domain("a 1-point grid requires f_min == f_max".into()));
            }
        } else if !(f_min < f_max) {
            return Err(Error::Domain(format!("grid requires f_min < f_max, got [{f_min}, {f_max}]")));
        }
        Ok(GridSpec { f_min, f_max, n, scale })
    }

    /// Lower bound of the grid.
    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    /// Upper bound of the grid.
    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacing rule.
    pub fn scale(&self) -> GridScale {
        self.scale
    }

    /// Materializes the grid. Endpoints are the exact bounds, so a grid capped
    /// at F_a never rounds above it.
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.f_min];
        }
        let last = self.n - 1;
        let ratio = self.f_max / self.f_min;
        let span = self.f_max - self.f_min;
        (0..self.n)
            .map(|i| {
                if i == 0 {
                    self.f_min
                } else if i == last {
                    self.f_max
                } else {
                    let t = i as f64 / last as f64;
                    match self.scale {
                        GridScale::Linear => self.f_min + span * t,
                        GridScale::Log => self.f_min * ratio.powf(t),
                    }
                }
            })
            .collect()
    }
}
