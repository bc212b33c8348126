//! Shared formatting for emitted artifacts.
//!
//! All floating-point output uses 12 significant digits in scientific
//! notation so that reruns compare byte for byte across machines.

/// Format a float with 12 significant digits.
pub(crate) fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

/// Render one CSV document from a header and pre-formatted rows.
pub(crate) fn csv_document(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.00000000000e0");
        assert_eq!(fmt_float(0.953_790_187_962_670_3), "9.53790187963e-1");
        assert_eq!(fmt_float(-2.5e-15), "-2.50000000000e-15");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_document_layout() {
        let doc = csv_document("a,b", vec!["1,2".into(), "3,4".into()]);
        assert_eq!(doc, "a,b\n1,2\n3,4\n");
    }
}
