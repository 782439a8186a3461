use nhband_core::Complex64;

/// Parse `3`, `-2.5`, `80i`, `-i`, `20+80i`, `1e-3-2e-2i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not leading and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(p) => (body[..p].parse().ok()?, imag(&body[p..])?),
        None => (0.0, imag(body)?),
    };
    Some(Complex64::new(re, im))
}

fn imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// Shortest text that [`parse_complex`] maps back to the same value.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.re == 0.0 {
        format!("{:?}i", z.im)
    } else if z.im < 0.0 || z.im.is_sign_negative() {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_complex("80i"), Some(c(0.0, 80.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("20+80i"), Some(c(20.0, 80.0)));
        assert_eq!(parse_complex(" 20 - 80i "), Some(c(20.0, -80.0)));
        assert_eq!(parse_complex("-3"), Some(c(-3.0, 0.0)));
        assert_eq!(parse_complex("1e-3-2e-2i"), Some(c(1e-3, -2e-2)));
        assert_eq!(parse_complex("2.5e+1i"), Some(c(0.0, 25.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
        assert_eq!(parse_complex("3+xi"), None);
    }

    #[test]
    fn format_round_trips() {
        for z in [c(0.0, 20.0), c(20.0, 80.0), c(0.1, -0.3), c(-1.5, 0.0), c(1e-300, 7e22)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }
}
