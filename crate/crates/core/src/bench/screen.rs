use std::collections::BTreeMap;

use crate::labels::Condition;

use super::ScoreRecord;

/// Listener exclusion rule on hidden-reference grades.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreeningRule {
    /// A reference graded below this counts as a failure.
    pub reference_threshold: f64,
    /// Largest tolerated fraction of failed trials.
    pub max_failure_rate: f64,
    /// Exclude only when the rate strictly exceeds the maximum.
    pub strict: bool,
}

impl Default for ScreeningRule {
    fn default() -> Self {
        Self { reference_threshold: 90.0, max_failure_rate: 0.15, strict: true }
    }
}

impl ScreeningRule {
    fn excludes(&self, failures: usize, trials: usize) -> bool {
        if trials == 0 {
            return false;
        }
        let rate = failures as f64 / trials as f64;
        if self.strict {
            rate > self.max_failure_rate
        } else {
            rate >= self.max_failure_rate
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ListenerScreening {
    pub listener_id: String,
    pub reference_trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Screening {
    pub kept: Vec<ScoreRecord>,
    pub excluded: Vec<String>,
    pub listeners: Vec<ListenerScreening>,
}

pub fn post_screen(records: &[ScoreRecord]) -> Screening {
    post_screen_with(records, &ScreeningRule::default())
}

/// Drop every record of listeners whose hidden-reference grades fail `rule`.
/// Screening is pooled over cohorts.
pub fn post_screen_with(records: &[ScoreRecord], rule: &ScreeningRule) -> Screening {
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        let t = tally.entry(&r.listener_id).or_default();
        if r.condition == Condition::Reference {
            t.0 += 1;
            if r.score < rule.reference_threshold {
                t.1 += 1;
            }
        }
    }
    let listeners: Vec<ListenerScreening> = tally
        .into_iter()
        .map(|(id, (trials, failures))| ListenerScreening {
            listener_id: id.to_string(),
            reference_trials: trials,
            failures,
            failure_rate: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
            excluded: rule.excludes(failures, trials),
        })
        .collect();
    let excluded: Vec<String> = listeners.iter().filter(|l| l.excluded).map(|l| l.listener_id.clone()).collect();
    let kept = records.iter().filter(|r| !excluded.contains(&r.listener_id)).cloned().collect();
    Screening { kept, excluded, listeners }
}
