//! Locale-independent number formatting shared by every text output.

/// 17 significant digits in scientific notation, e.g. `-1.2345678901234567e-3`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
