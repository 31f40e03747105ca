use crate::error::{Error, Result};
use crate::parse::scale_label;

use super::CellResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    PrettyText,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" | "pretty" => Ok(TableFormat::PrettyText),
            _ => Err(Error::InvalidConfig(format!("unknown table format '{s}'"))),
        }
    }
}

fn rows(results: &[CellResult]) -> (Vec<String>, Vec<Vec<String>>) {
    let max_n = results.iter().map(|r| r.point.n).max().unwrap_or(0);
    let mut header: Vec<String> = ["N", "m", "T", "eta", "theta", "algorithm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..=max_n).map(|k| format!("freq_{k}")));
    header.extend(
        ["ME", "STD", "PCW", "scale", "failures"]
            .iter()
            .map(|s| s.to_string()),
    );

    let body = results
        .iter()
        .map(|r| {
            let p = &r.point;
            let c = &r.cell;
            let mut row = vec![
                p.n.to_string(),
                p.m.to_string(),
                p.t.to_string(),
                p.innovations.label(),
                p.ar_theta.to_string(),
                r.algorithm.name().to_string(),
            ];
            row.extend((0..=max_n).map(|k| {
                if k <= p.n {
                    format!("{:.3}", c.freq(k))
                } else {
                    String::new()
                }
            }));
            row.push(format!("{:.3}", c.me));
            row.push(format!("{:.3}", c.std_msd));
            row.push(format!("{:.3}", c.pcw));
            row.push(scale_label(&p.scale_fn));
            row.push(c.failures.to_string());
            row
        })
        .collect();
    (header, body)
}

/// Render results. Column order: N, m, T, η, θ, algorithm, freq_0..freq_N,
/// ME, STD, PCW, then the scale function and failure count.
pub fn emit_tables(results: &[CellResult], format: TableFormat) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InvalidConfig("no results to emit".into()));
    }
    match format {
        TableFormat::Json => serde_json::to_string_pretty(results)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Io(e.to_string())),
        TableFormat::Csv => {
            let (header, body) = rows(results);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)
                .map_err(|e| Error::Io(e.to_string()))?;
            for row in &body {
                w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
        TableFormat::PrettyText => {
            let (header, body) = rows(results);
            let widths: Vec<usize> = (0..header.len())
                .map(|k| {
                    body.iter()
                        .map(|r| r[k].len())
                        .chain(std::iter::once(header[k].len()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            let mut out = line(&header);
            out.push('\n');
            for row in &body {
                out.push_str(&line(row));
                out.push('\n');
            }
            Ok(out)
        }
    }
}
