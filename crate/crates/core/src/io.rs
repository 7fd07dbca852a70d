//! Repeatable text formatting for numbers written to JSON and CSV.

use num_complex::Complex;

/// Twelve significant digits in scientific notation.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.11e}", x)
}

pub fn fmt_complex(z: Complex<f64>) -> String {
    let sign = if z.im < 0.0 { "-" } else { "+" };
    format!("{}{}{}i", fmt12(z.re), sign, fmt12(z.im.abs()))
}

/// One CSV row of numbers.
pub fn csv_row(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt12(x)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt12(-2.5), "-2.50000000000e0");
        assert_eq!(fmt_complex(Complex::new(0.0, -4.0)), "0.00000000000e0-4.00000000000e0i");
    }
}
