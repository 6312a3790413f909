//! Canonical numeric text used by every writer in the crate.
//!
//! All CSV/JSON output goes through `g17` so that emitted bytes are a pure
//! function of the value: 17 significant digits, enough for a lossless
//! f64 round-trip.

/// 17-significant-digit scientific notation; round-trips any finite f64.
pub(crate) fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest round-trip text, for labels and human-facing values.
pub(crate) fn compact(x: f64) -> String {
    format!("{x}")
}

/// Escapes a string for inclusion in hand-written JSON output.
pub(crate) fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
