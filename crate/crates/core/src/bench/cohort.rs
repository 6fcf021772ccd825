use std::collections::BTreeMap;
use std::fmt;

use crate::labels::{Cohort, Condition, ProcessingMethod};

use super::{mean_ci, summarize, ConditionStats, GroupBy, ScoreRecord, Summary};

/// Method of the trial an anchor was graded in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnchorContext {
    /// Among low-pass conditions, where anchors resemble the test items.
    WithinLp,
    OtherMethods,
}

impl fmt::Display for AnchorContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WithinLp => "within-LP",
            Self::OtherMethods => "other-methods",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnchorContextStats {
    pub cohort: Cohort,
    pub anchor: Condition,
    pub context: AnchorContext,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohortComparison {
    /// Grouped by (cohort, method, condition).
    pub by_cohort: Vec<ConditionStats>,
    pub anchor_context: Vec<AnchorContextStats>,
}

/// Per-cohort statistics plus anchor grades split by trial context.
/// Running (sum, count) per listener.
type PerListener<'a> = BTreeMap<&'a str, (f64, usize)>;

pub fn cohort_compare(records: &[ScoreRecord]) -> CohortComparison {
    let by_cohort = mean_ci(records, GroupBy::COHORT_METHOD_LEVEL);
    let mut acc: BTreeMap<(Cohort, Condition, AnchorContext), PerListener> = BTreeMap::new();
    for r in records.iter().filter(|r| r.condition.is_anchor()) {
        let ctx = if r.method == ProcessingMethod::LP { AnchorContext::WithinLp } else { AnchorContext::OtherMethods };
        let e = acc.entry((r.cohort, r.condition, ctx)).or_default().entry(&r.listener_id).or_default();
        e.0 += r.score;
        e.1 += 1;
    }
    let anchor_context = acc
        .into_iter()
        .filter_map(|((cohort, anchor, context), per)| {
            let means: Vec<f64> = per.values().map(|(s, n)| s / *n as f64).collect();
            summarize(&means).map(|summary| AnchorContextStats { cohort, anchor, context, summary })
        })
        .collect();
    CohortComparison { by_cohort, anchor_context }
}
