use alloc::format;
use alloc::string::String;

/// Shortest round-tripping text for a number; integral values print without
/// a fractional part.
pub(crate) fn number_label(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return String::from("0");
    }
    format!("{x}")
}

/// Fixed two-decimal coordinate text.
pub(crate) fn coord(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" { String::from("0.00") } else { s }
}

/// `round(100 * num / den)` with halves rounded up, computed exactly.
pub(crate) fn percent(num: usize, den: usize) -> usize {
    if den == 0 {
        return 0;
    }
    (200 * num + den) / (2 * den)
}
