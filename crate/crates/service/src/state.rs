use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use odaq_core::session::{build_session, check_stimuli, listener_seed, PlanConfig, Registry, SessionError, SessionPlan, Store};
use odaq_core::stimuli::StimulusIndex;
use odaq_core::Cohort;

use crate::writer::{Writer, WriterThread};
use crate::{ServiceConfig, ServiceError};

/// Shared, read-mostly service state.
pub struct AppState {
    index: StimulusIndex,
    plan_config: PlanConfig,
    master_seed: u64,
    roster: Option<std::collections::BTreeMap<String, Cohort>>,
    plans: RwLock<HashMap<String, Arc<SessionPlan>>>,
    tokens: RwLock<HashMap<String, PathBuf>>,
    pub(crate) registry: Arc<RwLock<Registry>>,
    pub(crate) writer: Writer,
}

fn valid_listener_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl AppState {
    /// Scan and check the stimuli, replay the store and start the writer.
    pub fn open(config: &ServiceConfig) -> Result<(Arc<Self>, WriterThread), ServiceError> {
        let index = StimulusIndex::scan(&config.stimuli_dir)
            .map_err(|source| ServiceError::Io { context: format!("scanning {}", config.stimuli_dir.display()), source })?;
        check_stimuli(&index, &config.plan)?;
        let store = Store::new(&config.results_path);
        let contents = store.load()?;
        let registry = Arc::new(RwLock::new(Registry::from_entries(&contents.entries)));
        let (writer, thread) = Writer::spawn(store, registry.clone());
        let state = Arc::new(Self {
            index,
            plan_config: config.plan.clone(),
            master_seed: config.master_seed,
            roster: config.roster.clone(),
            plans: RwLock::new(HashMap::new()),
            tokens: RwLock::new(HashMap::new()),
            registry,
            writer,
        });
        // Re-create the plans of listeners already in the store so that
        // their cohort is kept and their tokens resolve after a restart.
        for e in &contents.entries {
            state.plan_for(&e.listener_id, Some(e.cohort)).map_err(ServiceError::Session)?;
        }
        Ok((state, thread))
    }

    /// The listener's plan, built on first use. `cohort` applies only to
    /// listeners without a roster entry or existing plan.
    pub fn plan_for(&self, listener_id: &str, cohort: Option<Cohort>) -> Result<Arc<SessionPlan>, SessionError> {
        if let Some(p) = self.plans.read().expect("plans lock").get(listener_id) {
            return Ok(p.clone());
        }
        let cohort = match &self.roster {
            Some(r) => *r.get(listener_id).ok_or_else(|| SessionError::NotFound(format!("listener {listener_id} is not registered")))?,
            None if valid_listener_id(listener_id) => cohort.unwrap_or(Cohort::A),
            None => return Err(SessionError::NotFound(format!("invalid listener id {listener_id:?}"))),
        };
        let seed = listener_seed(self.master_seed, listener_id);
        let plan = Arc::new(build_session(&self.index, listener_id, cohort, seed, &self.plan_config)?);
        let mut plans = self.plans.write().expect("plans lock");
        let plan = plans.entry(listener_id.to_string()).or_insert(plan).clone();
        self.tokens.write().expect("tokens lock").extend(plan.tokens());
        Ok(plan)
    }

    pub fn resolve_token(&self, token: &str) -> Option<PathBuf> {
        self.tokens.read().expect("tokens lock").get(token).cloned()
    }

    pub fn completed(&self, listener_id: &str) -> Vec<String> {
        self.registry.read().expect("registry lock").completed(listener_id)
    }
}
