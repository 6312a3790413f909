//! Error type shared by the whole pipeline, with the CLI exit-code mapping.

use thiserror::Error;

/// Every failure the library can produce.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the model's domain (nonpositive field, singular position, bad grid).
    #[error("domain error: {0}")]
    Domain(String),

    /// Field strength strictly above the atomic field strength; the barrier is suppressed.
    #[error("field strength {} exceeds atomic field strength {}", trim6(*.f), trim6(*.f_a))]
    BarrierSuppressed { f: f64, f_a: f64 },

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A dataset with no samples where at least one is required.
    #[error("dataset contains no samples")]
    EmptyDataset,

    /// Fit basis is rank-deficient on the given data (fewer than 2 distinct field values).
    #[error("singular fit: fewer than 2 distinct field values")]
    SingularFit,

    /// Too few samples for the requested fit.
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Two curves do not share the same field grid.
    #[error("grid mismatch: curves do not share the same field grid")]
    GridMismatch,

    /// Two curves or datasets carry different time units.
    #[error("unit mismatch: operands carry different time units")]
    UnitMismatch,

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 3 for I/O failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Compact float text for error messages: 6 decimals with trailing zeros trimmed.
fn trim6(x: f64) -> String {
    let mut s = format!("{x:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_suppressed_message_names_both_fields() {
        let e = Error::BarrierSuppressed { f: 0.13, f_a: 0.12000000000000001 };
        let msg = e.to_string();
        assert!(msg.contains("0.13"), "{msg}");
        assert!(msg.contains("exceeds atomic field strength 0.12"), "{msg}");
    }

    #[test]
    fn exit_codes_split_io_from_domain() {
        assert_eq!(Error::Domain("x".into()).exit_code(), 2);
        assert_eq!(Error::Parse { line: 3, message: "bad".into() }.exit_code(), 2);
        let io = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(io.exit_code(), 3);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let e = Error::Parse { line: 7, message: "non-numeric cell".into() };
        assert!(e.to_string().contains("line 7"));
    }
}
