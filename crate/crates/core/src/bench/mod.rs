//! Subjective score handling, descriptive statistics and the
//! objective-versus-subjective correlation benchmark.

mod benchmark;
mod cohort;
mod records;
mod report;
mod screen;
mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use benchmark::{
    benchmark, benchmark_all, subjective_means, AuditEntry, BenchmarkOptions, CorrelationReport, MethodCorrelation, PairStatus,
};
pub use cohort::{cohort_compare, AnchorContext, AnchorContextStats, CohortComparison};
pub use records::{
    completeness, from_records, load_scores, read_score_records, write_score_records, ColumnMapping, ListenerCompleteness,
    LoadedScores, ScoreRecord, CANONICAL_COLUMNS, CONDITIONS_PER_TRIAL, EXPECTED_TRIALS,
};
pub use report::{render_heatmap_svg, write_anchor_context_csv, write_audit_csv, write_report_csv, write_stats_csv};
pub use screen::{post_screen, post_screen_with, ListenerScreening, Screening, ScreeningRule};
pub use stats::{
    fisher_aggregate, mean_ci, pearson, pearson_p_value, summarize, ConditionStats, FisherAggregate, GroupBy, GroupKey, Summary,
    FISHER_CLAMP,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{origin}, line {line}: {message}")]
    Validation { origin: String, line: usize, message: String },
    #[error("column mapping: {0}")]
    Mapping(String),
    #[error("{0}")]
    Statistics(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
