//! Shared output formatting.

/// Locale-free decimal with 17 significant digits, enough to round-trip any
/// binary64 value. Non-finite values print as `inf`, `-inf` and `NaN`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for v in [0.1, -1.0, 1e-300, 6.02214076e23, f64::MAX, 1.0 / 3.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(-1.0), "-1.0000000000000000e0");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
    }
}
