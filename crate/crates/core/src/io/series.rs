// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::Serialize;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::experiments::Sample;

pub const SERIES_HEADER: [&str; 5] = ["t", "E_N", "witness", "nu_min_pt", "validity_margin"];

/// 17 significant digits; parses back to the identical `f64`.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Parse { what: "csv output", message: e.to_string() };
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.write_record(row).map_err(ser)?;
    }
    w.into_inner().map_err(|e| Error::Parse { what: "csv output", message: e.to_string() })
}

/// Writes the per-sample series as CSV, replacing `path` atomically.
pub fn write_series(samples: &[Sample], path: &Path) -> Result<()> {
    let rows = samples
        .iter()
        .map(|s| [s.t, s.e_n, s.witness, s.nu_min_pt, s.validity_margin].into_iter().map(fmt).collect::<Vec<_>>());
    write_atomic(path, &csv_bytes(&SERIES_HEADER, rows)?)
}

/// Writes a numeric table; `None` cells are left empty.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let rows = rows.iter().map(|r| r.iter().map(|v| v.map(fmt).unwrap_or_default()).collect::<Vec<_>>());
    write_atomic(path, &csv_bytes(header, rows)?)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Parse { what: "json", message: e.to_string() })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Parses a series CSV produced by [`write_series`].
pub fn read_series(text: &str) -> Result<Vec<Sample>> {
    let bad = |message: String| Error::Parse { what: "series csv", message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(SERIES_HEADER) {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0; 5];
        for (j, slot) in v.iter_mut().enumerate() {
            let cell =
                record.get(j).ok_or_else(|| bad(format!("row {}: missing column {}", i + 1, SERIES_HEADER[j])))?;
            *slot = cell
                .parse()
                .map_err(|_| bad(format!("row {}: `{cell}` in column {} is not a number", i + 1, SERIES_HEADER[j])))?;
        }
        out.push(Sample { t: v[0], e_n: v[1], witness: v[2], nu_min_pt: v[3], validity_margin: v[4] });
    }
    Ok(out)
}
