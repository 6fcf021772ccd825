use std::collections::{HashMap, HashSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::ScoreRecord;
use crate::labels::{Cohort, Condition, ProcessingMethod};

use super::{Result, SessionError, SessionPlan};

/// A listener's grades for one trial as sent by the client, in slot order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub listener_id: String,
    pub trial_id: String,
    pub scores: Vec<Option<f64>>,
    pub auditioned: Vec<bool>,
    pub client_session_token: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredSlot {
    pub slot: usize,
    pub condition: Condition,
    pub score: f64,
}

/// One line of the results store: the submission together with the
/// unblinding needed to export it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredSubmission {
    pub listener_id: String,
    pub cohort: Cohort,
    pub trial_id: String,
    pub session: u8,
    pub trial_index: u32,
    pub training: bool,
    pub item_id: String,
    pub method: ProcessingMethod,
    pub slots: Vec<StoredSlot>,
    pub client_session_token: String,
    pub received_unix_ms: u64,
}

impl StoredSubmission {
    fn same_grades(&self, other: &Self) -> bool {
        self.slots == other.slots
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotProblem {
    pub slot: usize,
    pub reason: String,
}

/// Check a submission against the plan and unblind it.
pub fn validate_submission(plan: &SessionPlan, sub: &Submission, received_unix_ms: u64) -> Result<StoredSubmission> {
    if sub.listener_id != plan.listener_id {
        return Err(SessionError::Forbidden(format!("submission for {} on the plan of {}", sub.listener_id, plan.listener_id)));
    }
    let trial = plan
        .trial(&sub.trial_id)
        .ok_or_else(|| SessionError::Forbidden(format!("trial {} is not part of this listener's plan", sub.trial_id)))?;
    let mut problems = Vec::new();
    let mut slots = Vec::new();
    for (k, slot) in trial.slots.iter().enumerate() {
        match sub.scores.get(k).copied().flatten() {
            None => problems.push(SlotProblem { slot: k, reason: "missing score".into() }),
            Some(v) if !(0.0..=100.0).contains(&v) => problems.push(SlotProblem { slot: k, reason: format!("score {v} outside [0, 100]") }),
            Some(v) => slots.push(StoredSlot { slot: k, condition: slot.condition, score: v }),
        }
        if !sub.auditioned.get(k).copied().unwrap_or(false) {
            problems.push(SlotProblem { slot: k, reason: "not auditioned".into() });
        }
    }
    if sub.scores.len() > trial.slots.len() {
        problems.push(SlotProblem { slot: trial.slots.len(), reason: format!("{} scores for {} slots", sub.scores.len(), trial.slots.len()) });
    }
    if !problems.is_empty() {
        return Err(SessionError::Rejected(problems));
    }
    Ok(StoredSubmission {
        listener_id: plan.listener_id.clone(),
        cohort: plan.cohort,
        trial_id: trial.trial_id.clone(),
        session: trial.session,
        trial_index: trial.trial_index,
        training: trial.training,
        item_id: trial.item_id.clone(),
        method: trial.method,
        slots,
        client_session_token: sub.client_session_token.clone(),
        received_unix_ms,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubmitOutcome {
    /// New; the caller must persist it.
    Accepted(StoredSubmission),
    /// Identical to what is already stored.
    Duplicate,
}

/// Submission state rebuilt from the store: what each listener has sent and
/// which client session each listener is bound to.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    submitted: HashMap<(String, String), StoredSubmission>,
    client_tokens: HashMap<String, String>,
}

impl Registry {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = &'a StoredSubmission>) -> Self {
        let mut r = Self::default();
        for e in entries {
            r.record(e.clone());
        }
        r
    }

    pub fn completed(&self, listener_id: &str) -> Vec<String> {
        let mut ids: Vec<String> =
            self.submitted.keys().filter(|(l, _)| l == listener_id).map(|(_, t)| t.clone()).collect();
        ids.sort();
        ids
    }

    /// Decide on a submission without changing state.
    pub fn check(&self, plan: &SessionPlan, sub: &Submission, received_unix_ms: u64) -> Result<SubmitOutcome> {
        if let Some(bound) = self.client_tokens.get(&sub.listener_id) {
            if *bound != sub.client_session_token {
                return Err(SessionError::Forbidden("listener is active in another client session".into()));
            }
        }
        let stored = validate_submission(plan, sub, received_unix_ms)?;
        match self.submitted.get(&(stored.listener_id.clone(), stored.trial_id.clone())) {
            Some(prev) if prev.same_grades(&stored) => Ok(SubmitOutcome::Duplicate),
            Some(_) => Err(SessionError::Conflict(format!("trial {} was already submitted with different grades", stored.trial_id))),
            None => Ok(SubmitOutcome::Accepted(stored)),
        }
    }

    /// Note a persisted submission.
    pub fn record(&mut self, stored: StoredSubmission) {
        self.client_tokens.entry(stored.listener_id.clone()).or_insert_with(|| stored.client_session_token.clone());
        self.submitted.entry((stored.listener_id.clone(), stored.trial_id.clone())).or_insert(stored);
    }
}

/// Append-only JSON-lines results file.
#[derive(Clone, Debug)]
pub struct Store {
    path: PathBuf,
}

/// A store line that could not be used.
#[derive(Clone, Debug, PartialEq)]
pub struct Quarantined {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StoreContents {
    pub entries: Vec<StoredSubmission>,
    pub quarantined: Vec<Quarantined>,
}

impl Store {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Append one submission and flush it to disk.
    pub fn append(&self, entry: &StoredSubmission) -> Result<()> {
        let io = |source| SessionError::Io { path: self.path.clone(), source };
        let mut line = serde_json::to_string(entry).expect("submission serialises");
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path).map_err(io)?;
        f.write_all(line.as_bytes()).map_err(io)?;
        f.sync_data().map_err(io)
    }

    /// Read every line; unreadable or repeated lines are quarantined. A
    /// missing file is an empty store.
    pub fn load(&self) -> Result<StoreContents> {
        let file = match std::fs::File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(StoreContents::default()),
            Err(source) => return Err(SessionError::Io { path: self.path.clone(), source }),
        };
        let mut contents = StoreContents::default();
        let mut seen = HashSet::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    contents.quarantined.push(Quarantined { line: line_no, reason: e.to_string() });
                    continue;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<StoredSubmission>(&line) {
                Ok(entry) if !seen.insert((entry.listener_id.clone(), entry.trial_id.clone())) => contents.quarantined.push(Quarantined {
                    line: line_no,
                    reason: format!("repeated submission for {} / {}", entry.listener_id, entry.trial_id),
                }),
                Ok(entry) => contents.entries.push(entry),
                Err(e) => contents.quarantined.push(Quarantined { line: line_no, reason: e.to_string() }),
            }
        }
        for q in &contents.quarantined {
            log::warn!("{} line {}: quarantined: {}", self.path.display(), q.line, q.reason);
        }
        Ok(contents)
    }
}

/// Unblinded score records of every test (non-training) submission, ordered
/// by listener and trial.
pub fn export_scores(contents: &StoreContents) -> Vec<ScoreRecord> {
    let mut entries: Vec<&StoredSubmission> = contents.entries.iter().filter(|e| !e.training).collect();
    entries.sort_by(|a, b| (&a.listener_id, a.trial_index).cmp(&(&b.listener_id, b.trial_index)));
    entries
        .into_iter()
        .flat_map(|e| {
            e.slots.iter().map(move |s| ScoreRecord {
                listener_id: e.listener_id.clone(),
                cohort: e.cohort,
                session: e.session,
                trial_index: e.trial_index,
                item_id: e.item_id.clone(),
                method: e.method,
                condition: s.condition,
                score: s.score,
            })
        })
        .collect()
}
