//! Number formatting shared by the CSV writers and human-readable lines.

/// Shortest round-trip decimal, in exponent notation outside
/// `[1e-4, 1e15)`, with `inf`, `-inf` and `nan` spelled out.
pub fn real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::real;

    #[test]
    fn round_trips() {
        for v in [0.0, 0.5, -3.25, 1e-12, 2.7469887093640676e-15, 1e20, 123456.789] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v, "{}", real(v));
        }
        assert_eq!(real(1e-12), "1e-12");
        assert_eq!(real(0.5), "0.5");
        assert_eq!(real(f64::NEG_INFINITY), "-inf");
    }
}
