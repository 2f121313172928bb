//! Number formatting and the three output formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::{CliError, Result};

pub const SIGNIFICANT_DIGITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// `x` with ten significant digits; fixed notation for moderate magnitudes.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// JSON number rounded to ten significant digits, `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("round trip of formatted float");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// A command result: rows for table and CSV output, a JSON document, and
/// free-text notes shown only in table format.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| CliError::Data(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.csv(),
            Format::Table => Ok(self.table()),
        }
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Data(e.to_string()))
    }

    fn table(&self) -> String {
        let mut width: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.columns);
        out += &line(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for r in &self.rows {
            out += &line(r);
        }
        for n in &self.notes {
            out += n;
            out.push('\n');
        }
        out
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
            }
            fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source })
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig(2.99992628451234), "2.999926285");
        assert_eq!(sig(std::f64::consts::PI * 100.0), "314.1592654");
        assert_eq!(sig(1.0 / 3.0 * 1e-6), "3.333333333e-7");
        assert_eq!(sig(9.99999999999), "10.00000000");
        assert_eq!(sig(-0.5), "-0.5000000000");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(f64::NAN), "nan");
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(num(1.0 / 3.0).to_string(), "0.3333333333");
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut r = Report::new(["a", "b"]);
        r.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(r.csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
