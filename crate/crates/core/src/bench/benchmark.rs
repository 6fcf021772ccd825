use std::collections::BTreeMap;
use std::fmt;

use crate::labels::{Condition, ProcessingMethod};
use crate::metrics::{is_sentinel, MetricScore};

use super::{fisher_aggregate, pearson, pearson_p_value, BenchError, Result, ScoreRecord};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkOptions {
    /// Methods with fewer pairs are reported unavailable.
    pub min_pairs: usize,
    /// Correlations whose p-value reaches this are flagged low-confidence.
    pub alpha: f64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self { min_pairs: 3, alpha: 0.05 }
    }
}

/// Why a candidate pair did or did not enter a correlation.
#[derive(Clone, Debug, PartialEq)]
pub enum PairStatus {
    Used,
    /// Reference and anchor conditions never enter a correlation.
    ExcludedCondition,
    /// The metric saturated for this stimulus.
    Sentinel,
    MissingMetric,
    MissingSubjective,
}

impl fmt::Display for PairStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Used => "used",
            Self::ExcludedCondition => "excluded-condition",
            Self::Sentinel => "sentinel",
            Self::MissingMetric => "missing-metric",
            Self::MissingSubjective => "missing-subjective",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub method: ProcessingMethod,
    pub item_id: String,
    pub condition: Condition,
    pub metric_value: Option<f64>,
    pub subjective_mean: Option<f64>,
    pub status: PairStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodCorrelation {
    pub method: ProcessingMethod,
    /// `None` when fewer than `min_pairs` pairs were available.
    pub r: Option<f64>,
    pub n_pairs: usize,
    pub p_value: Option<f64>,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub metric: String,
    /// One entry per method in [`ProcessingMethod::ALL`] order.
    pub per_method: Vec<MethodCorrelation>,
    pub aggregated_r: Option<f64>,
    pub clamped: usize,
    pub warnings: Vec<String>,
    pub audit: Vec<AuditEntry>,
}

impl CorrelationReport {
    pub fn method(&self, m: ProcessingMethod) -> &MethodCorrelation {
        self.per_method.iter().find(|c| c.method == m).expect("every method is reported")
    }
}

type Key = (String, ProcessingMethod, Condition);

/// Mean grade per (item, method, condition) over listeners, each listener
/// averaged first.
pub fn subjective_means(records: &[ScoreRecord]) -> BTreeMap<Key, f64> {
    let mut acc: BTreeMap<Key, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for r in records {
        let e = acc.entry((r.item_id.clone(), r.method, r.condition)).or_default().entry(&r.listener_id).or_default();
        e.0 += r.score;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, per)| {
            let means: Vec<f64> = per.values().map(|(s, n)| s / *n as f64).collect();
            (k, means.iter().sum::<f64>() / means.len() as f64)
        })
        .collect()
}

/// Correlate one metric with the listener-mean grades, per method, over the
/// degraded conditions Q1..Q5 only.
pub fn benchmark(metric_scores: &[MetricScore], subjective: &[ScoreRecord], options: &BenchmarkOptions) -> Result<CorrelationReport> {
    let mut names: Vec<&str> = metric_scores.iter().map(|s| s.metric.as_str()).collect();
    names.dedup();
    names.sort_unstable();
    names.dedup();
    let metric = match names.as_slice() {
        [one] => one.to_string(),
        [] => return Err(BenchError::Statistics("no metric scores".into())),
        many => return Err(BenchError::Statistics(format!("benchmark takes one metric at a time, got {many:?}"))),
    };

    let means = subjective_means(subjective);
    let mut metric_by_key: BTreeMap<Key, f64> = BTreeMap::new();
    for s in metric_scores {
        metric_by_key.insert((s.item_id.clone(), s.method, s.condition), s.value);
    }
    let mut keys: Vec<&Key> = means.keys().chain(metric_by_key.keys()).collect();
    keys.sort();
    keys.dedup();

    let mut audit = Vec::new();
    let mut pairs: BTreeMap<ProcessingMethod, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for key in keys {
        let (item_id, method, condition) = key;
        let metric_value = metric_by_key.get(key).copied();
        let subjective_mean = means.get(key).copied();
        let status = match (condition.level(), metric_value, subjective_mean) {
            (None, _, _) => PairStatus::ExcludedCondition,
            (_, None, _) => PairStatus::MissingMetric,
            (_, _, None) => PairStatus::MissingSubjective,
            (_, Some(v), _) if is_sentinel(v) => PairStatus::Sentinel,
            (Some(_), Some(v), Some(s)) => {
                let p = pairs.entry(*method).or_default();
                p.0.push(v);
                p.1.push(s);
                PairStatus::Used
            }
        };
        audit.push(AuditEntry { method: *method, item_id: item_id.clone(), condition: *condition, metric_value, subjective_mean, status });
    }

    let mut warnings = Vec::new();
    for status in [PairStatus::MissingMetric, PairStatus::MissingSubjective] {
        let missing: Vec<String> = audit
            .iter()
            .filter(|a| a.status == status)
            .map(|a| format!("{}/{}/{}", a.item_id, a.method, a.condition))
            .collect();
        if !missing.is_empty() {
            warnings.push(format!("{metric}: {} pair(s) {status}: {}", missing.len(), missing.join(", ")));
        }
    }

    let mut per_method = Vec::new();
    for method in ProcessingMethod::ALL {
        let (x, y) = pairs.remove(&method).unwrap_or_default();
        let n_pairs = x.len();
        let r = if n_pairs >= options.min_pairs.max(3) {
            match pearson(&x, &y) {
                Ok(r) => Some(r),
                Err(e) => {
                    warnings.push(format!("{metric}/{method}: {e}"));
                    None
                }
            }
        } else {
            warnings.push(format!("{metric}/{method}: {n_pairs} pair(s), correlation unavailable"));
            None
        };
        let p_value = r.map(|r| pearson_p_value(r, n_pairs));
        per_method.push(MethodCorrelation {
            method,
            r,
            n_pairs,
            p_value,
            low_confidence: p_value.is_some_and(|p| p >= options.alpha),
        });
    }

    let available: Vec<f64> = per_method.iter().filter_map(|m| m.r).collect();
    let (aggregated_r, clamped) = if available.is_empty() {
        (None, 0)
    } else {
        if available.len() < per_method.len() {
            warnings.push(format!("{metric}: AGG over {} of {} methods", available.len(), per_method.len()));
        }
        let agg = fisher_aggregate(&available)?;
        (Some(agg.r), agg.clamped)
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(CorrelationReport { metric, per_method, aggregated_r, clamped, warnings, audit })
}

/// [`benchmark`] for each metric present, in name order.
pub fn benchmark_all(metric_scores: &[MetricScore], subjective: &[ScoreRecord], options: &BenchmarkOptions) -> Result<Vec<CorrelationReport>> {
    let mut by_metric: BTreeMap<&str, Vec<MetricScore>> = BTreeMap::new();
    for s in metric_scores {
        by_metric.entry(&s.metric).or_default().push(s.clone());
    }
    by_metric.values().map(|scores| benchmark(scores, subjective, options)).collect()
}
