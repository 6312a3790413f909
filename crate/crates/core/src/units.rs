//! Unit conversions between atomic units, attoseconds, and laser intensity.
//!
//! The two conversion constants are pinned here and nowhere else, so an
//! alternate convention only needs a re-pin in this module.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

/// One atomic unit of time, in attoseconds.
pub const AU_TIME_IN_AS: f64 = 24.188843265857;

/// Intensity in W/cm^2 corresponding to a field strength of 1 atomic unit.
pub const FIELD_AU_IN_W_CM2: f64 = 3.50944506e16;

/// Time unit a dataset or curve is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum TimeUnit {
    /// Atomic units of time.
    #[serde(rename = "au")]
    Atomic,
    /// Attoseconds.
    #[serde(rename = "as")]
    Attosecond,
}

impl TimeUnit {
    /// Factor that converts a value in this unit into atomic units.
    pub fn to_atomic_factor(self) -> f64 {
        match self {
            TimeUnit::Atomic => 1.0,
            TimeUnit::Attosecond => 1.0 / AU_TIME_IN_AS,
        }
    }

    /// Factor that converts a value in atomic units into this unit.
    pub fn from_atomic_factor(self) -> f64 {
        match self {
            TimeUnit::Atomic => 1.0,
            TimeUnit::Attosecond => AU_TIME_IN_AS,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeUnit::Atomic => "au",
            TimeUnit::Attosecond => "as",
        })
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "au" => Ok(TimeUnit::Atomic),
            "as" => Ok(TimeUnit::Attosecond),
            other => Err(Error::Domain(format!("unknown time unit '{other}' (expected au|as)"))),
        }
    }
}

/// Field-strength representation accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    /// Atomic units of field strength.
    Atomic,
    /// Peak intensity in W/cm^2.
    IntensityWCm2,
}

/// Converts a time from atomic units to attoseconds.
pub fn au_time_to_as(t: f64) -> f64 {
    t * AU_TIME_IN_AS
}

/// Converts a time from attoseconds to atomic units.
pub fn as_time_to_au(t: f64) -> f64 {
    t / AU_TIME_IN_AS
}

/// Converts a peak intensity in W/cm^2 to a field strength in atomic units.
pub fn intensity_to_field(i: f64) -> Result<f64> {
    if i < 0.0 {
        return Err(Error::Domain(format!("intensity must be nonnegative, got {i}")));
    }
    Ok((i / FIELD_AU_IN_W_CM2).sqrt())
}

/// Converts a field strength in atomic units to a peak intensity in W/cm^2.
pub fn field_to_intensity(f: f64) -> f64 {
    f * f * FIELD_AU_IN_W_CM2
}
