//! Number formatting and CSV/JSON assembly.

use std::fmt::Write as _;

use serde::Serialize;

/// `%.12g`: 12 significant digits, trailing zeros stripped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV document with a `#` reproducibility stamp above the header.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(stamp: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(text, "# {stamp}").unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        writeln!(self.text, "{}", cells.join(",")).unwrap();
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[derive(Serialize)]
pub struct JsonDocument<'a, C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config: &'a C,
    pub rows: &'a [R],
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.905), "0.905");
        assert_eq!(fmt_g(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_g(12f64.ln()), "2.48490664979");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(2.5e-7), "2.5e-07");
        assert_eq!(fmt_g(1.0 / 3.0 * 1e-6), "3.33333333333e-07");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g(0.00012345), "0.00012345");
        assert_eq!(fmt_g(9.9999999999999e-6), "1e-05");
    }
}
