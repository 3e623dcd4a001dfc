//! Number rendering for CSV output.

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents −4..=5, scientific otherwise, trailing zeros removed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa.to_string()), exp.abs())
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn renders_like_percent_g() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (40.0, "40"),
            (0.684040286651337, "0.68404"),
            (std::f64::consts::SQRT_2, "1.41421"),
            (2.508446, "2.50845"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001234567, "0.000123457"),
            (0.00001234567, "1.23457e-05"),
            (-0.25, "-0.25"),
            (9.999996, "10"),
            (1e-300, "1e-300"),
        ];
        for (x, want) in cases {
            assert_eq!(sig6(x), want, "{x}");
        }
    }

    #[test]
    fn output_parses_back_close() {
        for x in [0.1234564, 3.0e-9, 7.77e12, -42.4242] {
            let y: f64 = sig6(x).parse().unwrap();
            assert!((y - x).abs() <= 5e-6 * x.abs());
        }
    }
}
