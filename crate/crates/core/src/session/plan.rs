use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::labels::{Cohort, Condition, ProcessingMethod};
use crate::stimuli::StimulusIndex;

use super::{Result, SessionError};

/// Shape of one listener's test.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanConfig {
    pub sessions: usize,
    pub trials_per_session: usize,
    pub training_trials: usize,
    /// Items reserved for training; never used in test trials.
    pub training_items: Vec<String>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self { sessions: 3, trials_per_session: 10, training_trials: 3, training_items: Vec::new() }
    }
}

/// One graded slot. `condition` and `path` are server-side only.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub token: String,
    pub condition: Condition,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub trial_id: String,
    pub item_id: String,
    pub method: ProcessingMethod,
    /// 1-based; 0 for training.
    pub session: u8,
    /// Position in the listener's test order; training trials count separately.
    pub trial_index: u32,
    pub training: bool,
    /// Always-visible, labelled reference control.
    pub reference_token: String,
    pub reference_path: PathBuf,
    /// Graded slots in presentation order.
    pub slots: Vec<Slot>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionPlan {
    pub listener_id: String,
    pub cohort: Cohort,
    pub rng_seed: u64,
    pub training: Vec<Trial>,
    pub sessions: Vec<Vec<Trial>>,
}

impl SessionPlan {
    pub fn trials(&self) -> impl Iterator<Item = &Trial> {
        self.training.iter().chain(self.sessions.iter().flatten())
    }

    pub fn trial(&self, trial_id: &str) -> Option<&Trial> {
        self.trials().find(|t| t.trial_id == trial_id)
    }

    /// Playback token to file for every token of the plan.
    pub fn tokens(&self) -> BTreeMap<String, PathBuf> {
        let mut out = BTreeMap::new();
        for t in self.trials() {
            out.insert(t.reference_token.clone(), t.reference_path.clone());
            for s in &t.slots {
                out.insert(s.token.clone(), s.path.clone());
            }
        }
        out
    }

    /// What the client may see.
    pub fn public_view(&self) -> PublicPlan {
        let view = |t: &Trial| PublicTrial {
            trial_id: t.trial_id.clone(),
            session: t.session,
            training: t.training,
            volume_adjustable: t.training,
            reference_token: t.reference_token.clone(),
            slots: t.slots.iter().enumerate().map(|(i, s)| PublicSlot { slot: i, token: s.token.clone() }).collect(),
        };
        PublicPlan {
            listener_id: self.listener_id.clone(),
            training: self.training.iter().map(view).collect(),
            sessions: self.sessions.iter().map(|s| s.iter().map(view).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublicSlot {
    pub slot: usize,
    pub token: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublicTrial {
    pub trial_id: String,
    pub session: u8,
    pub training: bool,
    pub volume_adjustable: bool,
    pub reference_token: String,
    pub slots: Vec<PublicSlot>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublicPlan {
    pub listener_id: String,
    pub training: Vec<PublicTrial>,
    pub sessions: Vec<Vec<PublicTrial>>,
}

/// Per-listener plan seed derived from the deployment's master seed.
pub fn listener_seed(master: u64, listener_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"plan");
    h.update(master.to_le_bytes());
    h.update(listener_id.as_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

fn token(seed: u64, listener_id: &str, trial_id: &str, slot: &str) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [listener_id, trial_id, slot] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// Every `(item, method)` trial of the index, with files missing for any of
/// its eight conditions listed.
fn catalogue(index: &StimulusIndex) -> (Vec<(String, ProcessingMethod)>, Vec<String>) {
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for (item_id, item) in &index.items {
        let methods = item.methods();
        if methods.is_empty() {
            missing.push(format!("{item_id}: no degraded conditions"));
        }
        for m in methods {
            for c in item.missing(m) {
                missing.push(crate::stimuli::stimulus_file_name(item_id, m, c));
            }
            pairs.push((item_id.clone(), m));
        }
    }
    (pairs, missing)
}

/// Check that every trial has all eight files; returns the list of missing
/// file names otherwise.
pub fn check_stimuli(index: &StimulusIndex, config: &PlanConfig) -> Result<()> {
    let (pairs, missing) = catalogue(index);
    if !missing.is_empty() {
        return Err(SessionError::Incomplete(missing));
    }
    let (training, test): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|(i, _)| config.training_items.contains(i));
    if let Some(absent) = config.training_items.iter().find(|i| !index.items.contains_key(*i)) {
        return Err(SessionError::Incomplete(vec![format!("training item {absent} not in stimulus directory")]));
    }
    let want = config.sessions * config.trials_per_session;
    if test.len() != want {
        return Err(SessionError::Design(format!("{} test trials in the stimulus set, expected {want}", test.len())));
    }
    if training.len() < config.training_trials {
        return Err(SessionError::Design(format!(
            "{} training trials available, expected at least {}",
            training.len(),
            config.training_trials
        )));
    }
    Ok(())
}

/// Seeded plan: test trials shuffled and cut into sessions, slot order
/// shuffled independently per trial, training trials drawn from the
/// reserved items.
pub fn build_session(index: &StimulusIndex, listener_id: &str, cohort: Cohort, seed: u64, config: &PlanConfig) -> Result<SessionPlan> {
    check_stimuli(index, config)?;
    let (pairs, _) = catalogue(index);
    let (mut training_pairs, mut test_pairs): (Vec<_>, Vec<_>) =
        pairs.into_iter().partition(|(i, _)| config.training_items.contains(i));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    test_pairs.shuffle(&mut rng);
    training_pairs.shuffle(&mut rng);
    training_pairs.truncate(config.training_trials);

    let mut make = |item_id: &str, method: ProcessingMethod, trial_id: String, session: u8, trial_index: u32, training: bool| {
        let item = &index.items[item_id];
        let mut conditions = Condition::ALL;
        conditions.shuffle(&mut rng);
        let slots = conditions
            .iter()
            .enumerate()
            .map(|(k, &c)| Slot {
                token: token(seed, listener_id, &trial_id, &k.to_string()),
                condition: c,
                path: item.path(method, c).expect("checked").to_path_buf(),
            })
            .collect();
        Trial {
            reference_token: token(seed, listener_id, &trial_id, "ref"),
            reference_path: item.reference.clone().expect("checked"),
            trial_id,
            item_id: item_id.to_string(),
            method,
            session,
            trial_index,
            training,
            slots,
        }
    };

    let training = training_pairs
        .iter()
        .enumerate()
        .map(|(k, (i, m))| make(i, *m, format!("P{}", k + 1), 0, k as u32, true))
        .collect();
    let sessions = test_pairs
        .chunks(config.trials_per_session)
        .enumerate()
        .map(|(s, chunk)| {
            chunk
                .iter()
                .enumerate()
                .map(|(k, (i, m))| {
                    let n = s * config.trials_per_session + k;
                    make(i, *m, format!("T{:02}", n + 1), (s + 1) as u8, n as u32, false)
                })
                .collect()
        })
        .collect();
    Ok(SessionPlan { listener_id: listener_id.to_string(), cohort, rng_seed: seed, training, sessions })
}
