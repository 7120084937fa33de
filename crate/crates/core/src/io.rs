//! Number formatting shared by the text outputs.

use crate::vector::C64;

/// 16 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.15e}")
}

/// `re+imi` with 16 significant digits per part.
pub fn fmt_c64(v: C64) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.15e}{}{:.15e}i", v.re, sign, v.im.abs())
}

/// `re,im` with 16 significant digits per part.
pub fn fmt_c64_pair(v: C64) -> String {
    format!("{},{}", fmt_f64(v.re), fmt_f64(v.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        let x = 0.1 + 0.2;
        let back = fmt_f64(x).parse::<f64>().unwrap();
        assert!((back - x).abs() <= 1e-15 * x);
        assert_eq!(fmt_f64(-1.25e-21), "-1.250000000000000e-21");
        assert_eq!(fmt_c64(C64::new(1.5, -2.0)), "1.500000000000000e0-2.000000000000000e0i");
        assert_eq!(fmt_c64_pair(C64::new(0.0, -3.0)), "0.000000000000000e0,-3.000000000000000e0");
    }
}
