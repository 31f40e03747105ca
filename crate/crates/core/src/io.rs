//! CSV panels: rows are time periods (ascending), columns are series, with
//! an optional header row. Lines starting with `#` are comments.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<TimeSeriesPanel> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<TimeSeriesPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut width = 0;
    let mut first = true;
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::ParseError {
                line,
                col: 0,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if first {
            // a first row with any non-numeric field is the header
            first = false;
            width = rec.len();
            columns = vec![Vec::new(); width];
            if rec.iter().any(|f| f.parse::<f64>().is_err()) {
                names = Some(rec.iter().map(str::to_string).collect());
                continue;
            }
        }
        if rec.len() != width {
            return Err(Error::RaggedRows {
                line,
                got: rec.len(),
                expected: width,
            });
        }
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::ParseError {
                line,
                col: col + 1,
                msg: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell { line, col: col + 1 });
            }
            columns[col].push(v);
        }
    }
    let t_len = columns.first().map_or(0, Vec::len);
    if width == 0 || t_len == 0 {
        return Err(Error::EmptyPanel);
    }
    let values = DMatrix::from_fn(width, t_len, |i, t| columns[i][t]);
    match names {
        Some(n) => TimeSeriesPanel::with_names(values, n),
        None => TimeSeriesPanel::new(values),
    }
}

/// Header of series names, then one row per period. Values use Rust's
/// shortest round-trip formatting.
pub fn export_csv(panel: &TimeSeriesPanel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(panel.series_names())
        .expect("in-memory write");
    let v = panel.values();
    for t in 0..panel.t_len() {
        let row: Vec<String> = (0..panel.n_series())
            .map(|i| v[(i, t)].to_string())
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
