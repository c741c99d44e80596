//! Rendering of reports and tables as JSON, CSV or aligned text.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (json, csv, text)")),
        }
    }
}

/// A value that can be laid out as a table.
pub trait Tabular {
    fn headers(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
    /// Caption printed above the text table.
    fn title(&self) -> Option<String> {
        None
    }
    /// Lines printed below the text table.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
}

pub fn emit<T: Serialize + Tabular + ?Sized>(item: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(item)? + "\n"),
        Format::Csv => to_csv(item),
        Format::Text => Ok(to_text(item)),
    }
}

pub fn to_csv<T: Tabular + ?Sized>(item: &T) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(item.headers())?;
    for row in item.rows() {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AppError::Internal(e.to_string()))
}

/// Right-aligned columns; the first column is left-aligned.
pub fn to_text<T: Tabular + ?Sized>(item: &T) -> String {
    let headers = item.headers();
    let rows = item.rows();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut out = String::new();
        for (k, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if k == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.trim_end().to_string()
    };
    let mut out = String::new();
    if let Some(title) = item.title() {
        out.push_str(&title);
        out.push('\n');
    }
    out.push_str(&line(&headers));
    out.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    let notes = item.notes();
    if !notes.is_empty() {
        out.push('\n');
    }
    for note in notes {
        out.push_str(&note);
        out.push('\n');
    }
    out
}

/// Fixed decimals, or `NA`.
pub fn fixed(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.decimals$}"))
}

/// p-values: fixed above 1e-3, scientific below.
pub fn pval(v: Option<f64>) -> String {
    match v {
        None => "NA".into(),
        Some(p) if p >= 1e-3 => format!("{p:.4}"),
        Some(p) => format!("{p:.3e}"),
    }
}

/// Shortest round-tripping decimal.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Demo(Vec<(String, f64)>);

    impl Tabular for Demo {
        fn headers(&self) -> Vec<String> {
            vec!["name".into(), "value".into()]
        }
        fn rows(&self) -> Vec<Vec<String>> {
            self.0.iter().map(|(n, v)| vec![n.clone(), fixed(Some(*v), 2)]).collect()
        }
    }

    #[test]
    fn text_alignment() {
        let d = Demo(vec![("a".into(), 1.0), ("long".into(), 22.5)]);
        assert_eq!(to_text(&d), "name  value\n-----------\na      1.00\nlong  22.50\n");
        assert_eq!(to_csv(&d).unwrap(), "name,value\na,1.00\nlong,22.50\n");
    }

    #[test]
    fn p_value_formatting() {
        assert_eq!(pval(Some(0.05)), "0.0500");
        assert_eq!(pval(Some(9.312e-8)), "9.312e-8");
        assert_eq!(pval(None), "NA");
    }
}
