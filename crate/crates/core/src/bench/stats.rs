use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::labels::{Cohort, Condition, ProcessingMethod};
use crate::scalar::Real;

use super::{BenchError, Result, ScoreRecord};

/// Largest correlation magnitude passed to the Fisher transform.
pub const FISHER_CLAMP: f64 = 0.999_999;

/// Sample Pearson correlation, computed in two passes.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(BenchError::Statistics(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(BenchError::Statistics(format!("need at least 3 pairs, got {}", x.len())));
    }
    let n = T::lit(x.len() as f64);
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(BenchError::Statistics("correlation undefined for a constant vector".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Two-sided p-value of `r` over `n` pairs under the null of no correlation.
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherAggregate<T> {
    pub r: T,
    /// Inputs clamped to +-[`FISHER_CLAMP`] before transforming.
    pub clamped: usize,
}

/// `tanh(mean(atanh(r_i)))`.
pub fn fisher_aggregate<T: Real>(rs: &[T]) -> Result<FisherAggregate<T>> {
    if rs.is_empty() {
        return Err(BenchError::Statistics("nothing to aggregate".into()));
    }
    let limit = T::lit(FISHER_CLAMP);
    let mut clamped = 0;
    let mut sum = T::zero();
    for &r in rs {
        if !r.is_finite() || r.abs() > T::one() {
            return Err(BenchError::Statistics(format!("{} is not a correlation", r.as_f64())));
        }
        let c = if r.abs() > limit {
            clamped += 1;
            limit.copysign(r)
        } else {
            r
        };
        sum += c.atanh();
    }
    if clamped > 0 {
        log::warn!("{clamped} correlation(s) clamped to +-{FISHER_CLAMP} before aggregation");
    }
    Ok(FisherAggregate { r: (sum / T::lit(rs.len() as f64)).tanh(), clamped })
}

/// Mean and Student-t 95% interval of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// A single observation: the interval collapses to the mean.
    pub degenerate: bool,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some(Summary { n, mean, ci95_low: mean, ci95_high: mean, degenerate: true });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df > 0").inverse_cdf(0.975);
    let half = t * var.sqrt() / (n as f64).sqrt();
    // Keep the bounds ordered around the mean under rounding.
    Some(Summary { n, mean, ci95_low: (mean - half).min(mean), ci95_high: (mean + half).max(mean), degenerate: false })
}

/// Which record fields form a group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GroupBy {
    pub method: bool,
    pub condition: bool,
    pub item: bool,
    pub cohort: bool,
}

impl GroupBy {
    pub const METHOD_LEVEL: GroupBy = GroupBy { method: true, condition: true, item: false, cohort: false };
    pub const METHOD_LEVEL_ITEM: GroupBy = GroupBy { method: true, condition: true, item: true, cohort: false };
    pub const COHORT_METHOD_LEVEL: GroupBy = GroupBy { method: true, condition: true, item: false, cohort: true };

    fn key(&self, r: &ScoreRecord) -> GroupKey {
        GroupKey {
            cohort: self.cohort.then_some(r.cohort),
            method: self.method.then_some(r.method),
            condition: self.condition.then_some(r.condition),
            item_id: self.item.then(|| r.item_id.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub cohort: Option<Cohort>,
    pub method: Option<ProcessingMethod>,
    pub condition: Option<Condition>,
    pub item_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionStats {
    pub key: GroupKey,
    pub summary: Summary,
}

/// Group means with 95% intervals. Each listener's scores within a group are
/// averaged first, so `n` counts listeners.
pub fn mean_ci(records: &[ScoreRecord], group_by: GroupBy) -> Vec<ConditionStats> {
    let mut groups: BTreeMap<GroupKey, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for r in records {
        let acc = groups.entry(group_by.key(r)).or_default().entry(&r.listener_id).or_default();
        acc.0 += r.score;
        acc.1 += 1;
    }
    groups
        .into_iter()
        .filter_map(|(key, listeners)| {
            let means: Vec<f64> = listeners.values().map(|(s, n)| s / *n as f64).collect();
            summarize(&means).map(|summary| ConditionStats { key, summary })
        })
        .collect()
}
