//! Reference-based objective metrics and metric score files.

mod batch;
mod nmr;
mod scores;
mod sisdr;

use thiserror::Error;

use crate::signal::SignalError;

pub use batch::{measure_batch, measure_job, plan_measurements, MeasureJob, NativeMetric};
pub use nmr::{nmr, nmr_profile, NMR_FLOOR_DB, NMR_FRAME_LENGTH};
pub use scores::{ingest_external_scores, read_scores, write_scores, MetricScore};
pub use sisdr::{si_sdr, SI_SDR_CEILING_DB};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("signals differ: {0}")]
    Arity(String),
    #[error("metric undefined: {0}")]
    Undefined(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("stimulus directory: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;

/// True for the saturation values that stand in for an unbounded metric.
pub fn is_sentinel(value: f64) -> bool {
    value == NMR_FLOOR_DB || value == SI_SDR_CEILING_DB || value == -SI_SDR_CEILING_DB
}

fn check_pair<T: crate::Real>(a: &crate::signal::AudioBuffer<T>, b: &crate::signal::AudioBuffer<T>) -> Result<()> {
    if a.len() != b.len() || a.sample_rate() != b.sample_rate() {
        return Err(MetricError::Arity(format!(
            "{} samples @ {} Hz vs {} samples @ {} Hz",
            a.len(),
            a.sample_rate(),
            b.len(),
            b.sample_rate()
        )));
    }
    Ok(())
}
