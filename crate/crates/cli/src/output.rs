//! Deterministic CSV formatting: 17 significant decimal digits, fixed
//! column orders, empty fields for failed points.

/// Scientific notation with 17 significant digits; bit-identical across
/// runs for identical inputs.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_optional(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Flag column: semicolon-joined tokens.
pub fn join_flags(tokens: &[String]) -> String {
    tokens.join(";")
}
