//! The five controlled coding-artifact generators, the dialogue remix and
//! the per-condition generation pipeline.

mod bandwidth;
pub mod batch;
mod holes;
pub mod masking;
mod params;
mod pipeline;
mod preecho;
mod remix;
mod rng;
mod substitution;

use thiserror::Error;

use crate::signal::SignalError;

pub use bandwidth::apply_lp;
pub use holes::{apply_sh, apply_sh_with_stats, HoleStats};
pub use masking::{masking_threshold, MaskingModel, MaskingThreshold};
pub use params::{params_for, ArtifactParams, ANCHOR_CUTOFFS_HZ};
pub use pipeline::{apply_params, generate_anchor, generate_condition, generate_reference, LOUDNESS_TARGET_LUFS};
pub use preecho::apply_pe;
pub use remix::{remix_de, DEFAULT_BACKGROUND_ATTENUATION_DB};
pub use rng::{channel_rng, condition_seed};
pub use substitution::{apply_tm, apply_un, SUBSTITUTION_WINDOW};

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("invalid artifact parameter: {0}")]
    Parameter(String),
    #[error("no native generator for {0}; supply separated stems")]
    Unsupported(crate::ProcessingMethod),
    #[error("input mismatch: {0}")]
    Arity(String),
}

pub type Result<T, E = ArtifactError> = std::result::Result<T, E>;
