//! CSV emission with fixed, C-style float formatting.

use std::fmt::Write as _;

pub const SCHEMA: u32 = 1;

/// `%.12e` as C prints it: `1.000000000000e+00`. Negative zero prints as zero.
pub fn fmt_sci(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| fmt_sci(*v)).collect();
    format!("({})", parts.join(", "))
}

/// A CSV table with a `#schema=` comment line and a header row.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(meta: &[(&str, &str)], header: &[String]) -> Csv {
        let mut text = format!("#schema={SCHEMA}");
        for (k, v) in meta {
            let _ = write!(text, " {k}={v}");
        }
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        Csv {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width does not match header");
        let cells: Vec<String> = values.iter().map(|v| fmt_sci(*v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}
