//! Result emission: flat metric rows as CSV or JSON, with stable column
//! ordering and exact float round-tripping between both formats.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::SummaryPoint;

/// One emitted metric row: `(N, AC, metric)` with the scenario
/// fingerprint and seed recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub fingerprint: String,
    pub seed: u64,
    pub stations: u32,
    pub replications: u32,
    /// Compare-mode variant tag; empty outside compare.
    #[serde(default)]
    pub variant: String,
    pub ac: String,
    pub metric: String,
    pub mean: f64,
    pub stddev: f64,
}

/// Output format of `emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Flatten summary points into rows, preserving point and metric order.
pub fn rows_from(points: &[SummaryPoint], variant: &str) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for p in points {
        for m in &p.metrics {
            rows.push(ResultRow {
                fingerprint: p.fingerprint.clone(),
                seed: p.seed,
                stations: p.n_stations,
                replications: p.replications,
                variant: variant.to_string(),
                ac: m.ac.label().to_string(),
                metric: m.metric.clone(),
                mean: m.mean,
                stddev: m.stddev,
            });
        }
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[ResultRow], out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(out, rows).map_err(io::Error::other)
}

pub fn read_csv<R: Read>(input: R) -> io::Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect::<Result<Vec<_>, _>>().map_err(io::Error::other)
}

pub fn read_json<R: Read>(input: R) -> io::Result<Vec<ResultRow>> {
    serde_json::from_reader(input).map_err(io::Error::other)
}

/// Render rows to an in-memory buffer.
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(rows, &mut buf).expect("in-memory write"),
        OutputFormat::Json => write_json(rows, &mut buf).expect("in-memory write"),
    }
    buf
}

/// Write summary points to `path` in the requested format.
pub fn emit(points: &[SummaryPoint], format: OutputFormat, path: &Path) -> io::Result<()> {
    emit_rows(&rows_from(points, ""), format, path)
}

pub fn emit_rows(rows: &[ResultRow], format: OutputFormat, path: &Path) -> io::Result<()> {
    let file = File::create(path)?;
    match format {
        OutputFormat::Csv => write_csv(rows, file),
        OutputFormat::Json => write_json(rows, file),
    }
}
