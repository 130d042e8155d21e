//! Output number formatting: every float leaves the crate rounded to 12
//! significant digits.

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub(crate) fn round_point(p: [f64; 3]) -> [f64; 3] {
    [round_sig(p[0]), round_sig(p[1]), round_sig(p[2])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(0.8), "0.8");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0 / 729.0), "0.00137174211248");
        assert_eq!(round_sig(123456789012345.0), 123456789012000.0);
    }
}
