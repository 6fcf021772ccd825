use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::labels::{Condition, ProcessingMethod};

use super::{MetricError, Result};

/// One objective score for one stimulus of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: String,
    pub item_id: String,
    pub method: ProcessingMethod,
    pub condition: Condition,
    pub value: f64,
}

impl MetricScore {
    pub fn key(&self) -> (&str, &str, ProcessingMethod, Condition) {
        (&self.metric, &self.item_id, self.method, self.condition)
    }
}

#[derive(Deserialize)]
struct Row {
    metric: String,
    item_id: String,
    method: String,
    condition: String,
    value: String,
}

/// Parse and validate a `metric,item_id,method,condition,value` file from
/// any reader. `origin` labels diagnostics.
pub fn read_scores(reader: impl Read, origin: &str) -> Result<Vec<MetricScore>> {
    let bad = |line: usize, message: String| MetricError::Validation { path: origin.to_string(), message: format!("line {line}: {message}") };
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    for col in ["metric", "item_id", "method", "condition", "value"] {
        if !headers.iter().any(|h| h == col) {
            return Err(bad(1, format!("missing column {col}")));
        }
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in csv.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| bad(line, e.to_string()))?;
        if row.metric.is_empty() || row.item_id.is_empty() {
            return Err(bad(line, "empty metric or item_id".into()));
        }
        let method: ProcessingMethod = row.method.parse().map_err(|e| bad(line, format!("{e}")))?;
        let condition: Condition = row.condition.parse().map_err(|e| bad(line, format!("{e}")))?;
        let value: f64 = row.value.parse().map_err(|_| bad(line, format!("value {:?} is not a number", row.value)))?;
        if !value.is_finite() {
            return Err(bad(line, format!("value {value} is not finite")));
        }
        let score = MetricScore { metric: row.metric, item_id: row.item_id, method, condition, value };
        let key = (score.metric.clone(), score.item_id.clone(), method, condition);
        if !seen.insert(key) {
            return Err(bad(
                line,
                format!("duplicate score for ({}, {}, {method}, {condition})", score.metric, score.item_id),
            ));
        }
        out.push(score);
    }
    Ok(out)
}

/// Load an externally computed metric file.
pub fn ingest_external_scores(path: &Path) -> Result<Vec<MetricScore>> {
    let file = std::fs::File::open(path).map_err(|source| MetricError::Io { path: path.display().to_string(), source })?;
    read_scores(file, &path.display().to_string())
}

pub fn write_scores(writer: impl Write, scores: &[MetricScore]) -> Result<()> {
    let io = |e: csv::Error| MetricError::Io { path: "<output>".into(), source: e.into() };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "item_id", "method", "condition", "value"]).map_err(io)?;
    for s in scores {
        w.write_record([&s.metric, &s.item_id, s.method.as_str(), s.condition.as_str(), &s.value.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| MetricError::Io { path: "<output>".into(), source: e })?;
    Ok(())
}
