//! Plain-text number formatting and CSV helpers shared by the writers.

use std::io::Write;

/// Formats `x` with 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `# key = value` lines describing a run.
pub fn write_comment_header<W: Write>(w: &mut W, entries: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}
