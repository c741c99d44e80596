//! Point patterns as CSV: two columns `x,y` in `[0,1]`, optional header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use mfcsr_core::{Point, PointPattern};

use crate::error::{AppError, Result};

/// Reads a pattern from `path`; errors carry the file and line.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<PointPattern> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_points(file, path)
}

/// Reads `x,y` rows. A first row that does not parse as two numbers is a
/// header; if it names columns `x` and `y`, those columns are used.
pub fn read_points(reader: impl Read, origin: impl Into<PathBuf>) -> Result<PointPattern> {
    let origin = origin.into();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let err = |line: u64, message: String| AppError::Parse { path: origin.clone(), line, message };
    let mut cols = (0usize, 1usize);
    let mut points = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(k as u64 + 1, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if k == 0 && record.get(0).and_then(|v| v.parse::<f64>().ok()).is_none() {
            let find = |name: &str| record.iter().position(|h| h.eq_ignore_ascii_case(name));
            if let (Some(x), Some(y)) = (find("x"), find("y")) {
                cols = (x, y);
            }
            continue;
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| err(line, format!("missing {name} column")))?;
            let v: f64 = raw.parse().map_err(|_| err(line, format!("cannot parse {name} value `{raw}`")))?;
            if v.is_nan() {
                return Err(err(line, format!("{name} is NaN")));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(err(line, format!("{name}={v} outside [0, 1]")));
            }
            Ok(v)
        };
        points.push(Point::new(field(cols.0, "x")?, field(cols.1, "y")?));
    }
    Ok(PointPattern::new(points)?)
}

/// Writes `x,y` with a header row.
pub fn write_points(writer: impl Write, pattern: &PointPattern) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y"])?;
    for p in pattern.points() {
        w.write_record([format!("{:?}", p.x), format!("{:?}", p.y)])?;
    }
    w.flush().map_err(|e| AppError::Internal(e.to_string()))?;
    Ok(())
}

pub fn write_points_csv(path: impl AsRef<Path>, pattern: &PointPattern) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_points(file, pattern)
}
