//! Metric rows and CSV writers.

use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub checkpoint: usize,
    pub metric: String,
    pub value: f64,
}

impl Row {
    pub fn new(checkpoint: usize, metric: impl Into<String>, value: f64) -> Self {
        Self {
            checkpoint,
            metric: metric.into(),
            value,
        }
    }
}

/// Writes `checkpoint,metric,value` rows.
pub fn write_rows(path: &Path, rows: &[Row]) -> csv::Result<()> {
    write_records(path, &["checkpoint", "metric", "value"], rows)
}

/// Writes `header` then one line per record; the header is present even
/// when there are no records.
pub fn write_records<T: Serialize>(path: &Path, header: &[&str], records: &[T]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Looks up a metric value.
pub fn find(rows: &[Row], checkpoint: usize, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.checkpoint == checkpoint && r.metric == metric)
        .map(|r| r.value)
}

/// `(checkpoint, value)` series of one metric, in row order.
pub fn series(rows: &[Row], metric: &str) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.metric == metric)
        .map(|r| (r.checkpoint, r.value))
        .collect()
}
