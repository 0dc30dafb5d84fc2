//! Result tables.
//!
//! CSV columns: `method,N,n,d,s,value,moment_time_s,solve_time_s,status,certified`.
//! Values carry 6 significant digits (fixed notation for magnitudes in
//! `[1e-4, 1e6)`, otherwise `d.ddddde±x`), times 2 decimals in seconds, `s` is
//! empty for single-fraction methods and `certified` is `true` or `false`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hierarchy::HierarchyResult;

pub const CSV_HEADER: [&str; 10] = [
    "method",
    "N",
    "n",
    "d",
    "s",
    "value",
    "moment_time_s",
    "solve_time_s",
    "status",
    "certified",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    /// Aligned plain-text columns for terminals.
    Text,
}

/// Six significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0.00000".into();
    }
    let mut exp = v.abs().log10().floor() as i32;
    // Rounding may carry into the next decade (9.999996 -> 10.0000).
    let rounded = format!("{:.5e}", v);
    if let Some(e) = rounded.split('e').nth(1).and_then(|e| e.parse::<i32>().ok()) {
        exp = e;
    }
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        rounded
    }
}

pub fn format_seconds(s: f64) -> String {
    format!("{s:.2}")
}

fn row(r: &HierarchyResult) -> [String; 10] {
    [
        r.method.tag().to_string(),
        r.n_fractions.to_string(),
        r.n.to_string(),
        r.d.to_string(),
        r.s.map(|s| s.to_string()).unwrap_or_default(),
        format_value(r.value),
        format_seconds(r.moment_time.as_secs_f64()),
        format_seconds(r.solve_time.as_secs_f64()),
        r.status.as_str().to_string(),
        r.certified.to_string(),
    ]
}

pub fn emit_table(results: &[HierarchyResult], format: TableFormat, w: impl Write) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Invalid("no results to write".into()));
    }
    let rows: Vec<[String; 10]> = results.iter().map(row).collect();
    match format {
        TableFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(CSV_HEADER).map_err(csv_error)?;
            for r in &rows {
                csv.write_record(r).map_err(csv_error)?;
            }
            csv.flush()?;
        }
        TableFormat::Text => {
            let mut w = w;
            let mut widths = CSV_HEADER.map(str::len);
            for r in &rows {
                for (k, cell) in r.iter().enumerate() {
                    widths[k] = widths[k].max(cell.len());
                }
            }
            let line = |cells: &[&str]| -> String {
                cells
                    .iter()
                    .zip(widths)
                    .map(|(c, wd)| format!("{c:>wd$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(w, "{}", line(&CSV_HEADER))?;
            for r in &rows {
                let cells: Vec<&str> = r.iter().map(String::as_str).collect();
                writeln!(w, "{}", line(&cells))?;
            }
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Invalid(format!("csv: {other:?}")),
    }
}
