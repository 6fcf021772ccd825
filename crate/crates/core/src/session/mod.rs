//! Listening-test sessions: seeded blind trial plans, submission checks and
//! the append-only results store.

mod plan;
mod store;

use std::path::PathBuf;

use thiserror::Error;

pub use plan::{
    build_session, check_stimuli, listener_seed, PlanConfig, PublicPlan, PublicSlot, PublicTrial, SessionPlan, Slot, Trial,
};
pub use store::{
    export_scores, validate_submission, Quarantined, Registry, SlotProblem, Store, StoreContents, StoredSlot, StoredSubmission,
    Submission, SubmitOutcome,
};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("stimulus set incomplete; missing: {}", .0.join(", "))]
    Incomplete(Vec<String>),
    #[error("test design: {0}")]
    Design(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("submission rejected: {} slot problem(s)", .0.len())]
    Rejected(Vec<SlotProblem>),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = SessionError> = std::result::Result<T, E>;
