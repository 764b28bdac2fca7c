//! Flag value parsers.

use vpl_core::Coeff;

/// Parses `re`, `imi`, or `re±imi`; a bare `i` means one.
pub fn complex(s: &str) -> Result<Coeff, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number {s:?}; expected re or re+imi");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return real(&t).map(|re| Coeff::new(re, 0.0)).ok_or_else(bad);
    };
    // split at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k]).ok_or_else(bad)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => real(v).ok_or_else(bad)?,
    };
    Ok(Coeff::new(re, im))
}

fn real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_forms() {
        assert_eq!(complex("1").unwrap(), Coeff::new(1.0, 0.0));
        assert_eq!(complex("-0.5").unwrap(), Coeff::new(-0.5, 0.0));
        assert_eq!(complex("2i").unwrap(), Coeff::new(0.0, 2.0));
        assert_eq!(complex("-i").unwrap(), Coeff::new(0.0, -1.0));
        assert_eq!(complex("1+2i").unwrap(), Coeff::new(1.0, 2.0));
        assert_eq!(complex("1.5-i").unwrap(), Coeff::new(1.5, -1.0));
        assert_eq!(complex("1e-3-2.5e+1i").unwrap(), Coeff::new(1e-3, -25.0));
        assert_eq!(complex("-1e2i").unwrap(), Coeff::new(0.0, -100.0));
    }

    #[test]
    fn rejected_forms() {
        for s in ["", "abc", "1+", "1+xi", "nan", "inf", "1++2i", "ii"] {
            assert!(complex(s).is_err(), "{s}");
        }
    }
}
