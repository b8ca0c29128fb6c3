use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    /// Converts a value in nats to the display unit.
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Fixed-point (or scientific, for very large or small magnitudes) with six
/// significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exponent) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.999996 -> 10.00000).
    let rounded: f64 = s.parse().expect("formatted float");
    if rounded.abs() >= 10f64.powi(exponent + 1) {
        return sig6(rounded);
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(std::f64::consts::LN_2 / 4.0), "0.173287");
        assert_eq!(sig6((0.75f64).ln()), "-0.287682");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(123.4567), "123.457");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(9.9999996), "10.0000");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(2.0e9), "2.00000e9");
    }

    #[test]
    fn bits() {
        assert_eq!(Units::Bits.scale(std::f64::consts::LN_2), 1.0);
        assert_eq!(Units::Nats.scale(0.3), 0.3);
    }
}
