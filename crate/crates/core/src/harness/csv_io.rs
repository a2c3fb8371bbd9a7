//! Aggregate CSV: `epoch,metric,mean,std,nruns`, one row per (epoch, metric),
//! reals in scientific notation with 17 significant digits, LF line endings.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::Metric;

use super::run::{AggregateRecord, AggregateRow};

pub const HEADER: [&str; 5] = ["epoch", "metric", "mean", "std", "nruns"];

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(record: &AggregateRecord) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in &record.rows {
        w.write_record([
            r.epoch.to_string(),
            r.metric.name().to_string(),
            real(r.mean),
            real(r.std),
            r.nruns.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn emit_csv(record: &AggregateRecord, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(record)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses an aggregate CSV. Failure metadata is not part of the format, so
/// the result has no failures.
pub fn parse_csv(text: &str) -> Result<AggregateRecord> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(Error::Parse(format!(
            "expected header {}",
            HEADER.join(",")
        )));
    }
    let mut record = AggregateRecord::default();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let at = |msg: String| Error::Parse(format!("data row {}: {msg}", line + 1));
        if row.len() != HEADER.len() {
            return Err(at(format!(
                "expected {} fields, got {}",
                HEADER.len(),
                row.len()
            )));
        }
        let epoch = row[0]
            .parse::<u64>()
            .map_err(|e| at(format!("epoch: {e}")))?;
        let metric = row[1].parse::<Metric>().map_err(|e| at(e.to_string()))?;
        let mean = row[2]
            .parse::<f64>()
            .map_err(|e| at(format!("mean: {e}")))?;
        let std = row[3].parse::<f64>().map_err(|e| at(format!("std: {e}")))?;
        let nruns = row[4]
            .parse::<usize>()
            .map_err(|e| at(format!("nruns: {e}")))?;
        if !record.metrics.contains(&metric) {
            record.metrics.push(metric);
        }
        record.rows.push(AggregateRow {
            epoch,
            metric,
            mean,
            std,
            nruns,
        });
    }
    Ok(record)
}
