//! CSV and JSON writers with stable, replayable formatting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn number(value: f64) -> String {
    format!("{value:.16e}")
}

/// A CSV cell; absent values (dark ports, diverging weak values) are empty.
pub fn cell(value: Option<f64>) -> String {
    value.map(number).unwrap_or_default()
}

/// Writes a header and rows, newline-terminated.
pub fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<Option<f64>>>,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(cell).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, report: &T) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()
}
