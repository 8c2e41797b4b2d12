//! Shared CSV formatting.

/// 17 significant digits, period decimal separator.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
