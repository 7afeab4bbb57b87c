/// Formats `x` with `digits` significant digits in the style of C's `%.Ng`:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros removed. Independent of locale.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // the exponent after rounding to `digits` significant digits
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig(0.0, 12), "0");
        assert_eq!(sig(1.0, 12), "1");
        assert_eq!(sig(0.05, 12), "0.05");
        assert_eq!(sig(0.1 + 0.2, 12), "0.3");
        assert_eq!(sig(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(sig(-1234.5, 12), "-1234.5");
        assert_eq!(sig(1.25e-7, 12), "1.25e-07");
        assert_eq!(sig(6.02e23, 12), "6.02e+23");
        assert_eq!(sig(999999999999.9, 12), "1e+12");
        assert_eq!(sig(0.00012345, 3), "0.000123");
        assert_eq!(sig(f64::NAN, 12), "nan");
    }
}
