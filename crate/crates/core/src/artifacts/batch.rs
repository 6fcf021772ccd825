//! Manifest-driven generation of a full stimulus directory.
//!
//! Work is split into an item preparation step (load, normalise, resolve
//! stems) and independent per-stimulus jobs, so a caller can run jobs on any
//! worker pool.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::labels::{Condition, ProcessingMethod, QualityLevel};
use crate::signal::{read_wav, write_wav, AudioBuffer, BitDepth, SignalError};
use crate::stimuli::{stimulus_file_name, Sidecar};

use super::{
    condition_seed, generate_anchor, generate_condition, generate_reference, remix_de, ArtifactError, ArtifactParams,
    ANCHOR_CUTOFFS_HZ, DEFAULT_BACKGROUND_ATTENUATION_DB, LOUDNESS_TARGET_LUFS,
};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Audio {
        path: PathBuf,
        #[source]
        source: SignalError,
    },
    #[error("item {item_id}: {source}")]
    Generation {
        item_id: String,
        #[source]
        source: ArtifactError,
    },
    #[error("item {item_id}: DE needs a stems directory with Qn_dialogue.wav / Qn_background.wav")]
    MissingStems { item_id: String },
}

impl BatchError {
    /// True for failures caused by unreadable or unwritable files rather than
    /// by invalid input.
    pub fn is_io(&self) -> bool {
        match self {
            Self::Io { .. } => true,
            Self::Audio { source, .. } => matches!(source, SignalError::Io(_)),
            _ => false,
        }
    }
}

/// One manifest row.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub item_id: String,
    pub path: PathBuf,
    pub methods: Vec<ProcessingMethod>,
    /// Directory of externally separated stems, needed for DE.
    pub stems: Option<PathBuf>,
}

#[derive(Deserialize)]
struct RawRow {
    item_id: String,
    path: String,
    methods: String,
    #[serde(default)]
    stems: Option<String>,
}

fn valid_item_id(id: &str) -> bool {
    !id.is_empty() && !id.contains("__") && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

/// Read a `item_id,path,methods[,stems]` manifest. Relative paths are
/// resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, BatchError> {
    let bad = |message: String| BatchError::Manifest { path: path.to_path_buf(), message };
    let text = std::fs::read_to_string(path).map_err(|source| BatchError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| bad(format!("line {line}: {e}")))?;
        if !valid_item_id(&row.item_id) {
            return Err(bad(format!("line {line}: invalid item_id {:?}", row.item_id)));
        }
        if !seen.insert(row.item_id.clone()) {
            return Err(bad(format!("line {line}: duplicate item_id {}", row.item_id)));
        }
        let mut methods = Vec::new();
        for m in row.methods.split(';').map(str::trim).filter(|m| !m.is_empty()) {
            let m: ProcessingMethod = m.parse().map_err(|e| bad(format!("line {line}: {e}")))?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(bad(format!("line {line}: no methods for {}", row.item_id)));
        }
        entries.push(ManifestEntry {
            item_id: row.item_id,
            path: base.join(row.path),
            methods,
            stems: row.stems.filter(|s| !s.is_empty()).map(|s| base.join(s)),
        });
    }
    Ok(entries)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchConfig {
    pub out_dir: PathBuf,
    pub master_seed: u64,
    pub target_lufs: f64,
    /// Restrict to these methods; `None` keeps the manifest's.
    pub methods: Option<Vec<ProcessingMethod>>,
    /// Restrict to these levels; `None` means all five.
    pub levels: Option<Vec<QualityLevel>>,
    pub de_attenuation_db: f64,
    pub bit_depth: BitDepth,
}

impl BatchConfig {
    pub fn new(out_dir: impl Into<PathBuf>, master_seed: u64) -> Self {
        Self {
            out_dir: out_dir.into(),
            master_seed,
            target_lufs: LOUDNESS_TARGET_LUFS,
            methods: None,
            levels: None,
            de_attenuation_db: DEFAULT_BACKGROUND_ATTENUATION_DB,
            bit_depth: BitDepth::Float32,
        }
    }
}

/// One output file to produce.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub item_id: String,
    pub method: ProcessingMethod,
    pub condition: Condition,
    pub output: PathBuf,
    pub seed: u64,
}

impl Job {
    pub fn sidecar_path(&self) -> PathBuf {
        self.output.with_extension("json")
    }
}

fn selected_methods(entry: &ManifestEntry, config: &BatchConfig) -> Vec<ProcessingMethod> {
    entry
        .methods
        .iter()
        .copied()
        .filter(|m| config.methods.as_ref().is_none_or(|f| f.contains(m)))
        .collect()
}

/// Jobs for one item: reference, both anchors, then every selected
/// `(method, level)`.
pub fn plan_item(entry: &ManifestEntry, config: &BatchConfig) -> Vec<Job> {
    let methods = selected_methods(entry, config);
    let Some(&first) = methods.first() else {
        return Vec::new();
    };
    let job = |method: ProcessingMethod, condition: Condition| Job {
        item_id: entry.item_id.clone(),
        method,
        condition,
        output: config.out_dir.join(stimulus_file_name(&entry.item_id, method, condition)),
        seed: condition_seed(config.master_seed, &entry.item_id, method, condition),
    };
    let mut jobs = vec![
        job(first, Condition::Reference),
        job(first, Condition::Anchor35),
        job(first, Condition::Anchor70),
    ];
    let levels = config.levels.clone().unwrap_or_else(|| QualityLevel::ALL.to_vec());
    for m in methods {
        for q in &levels {
            jobs.push(job(m, Condition::Level(*q)));
        }
    }
    jobs
}

pub fn plan(entries: &[ManifestEntry], config: &BatchConfig) -> Vec<Job> {
    entries.iter().flat_map(|e| plan_item(e, config)).collect()
}

/// An item loaded and normalised, ready for its jobs.
pub struct PreparedItem {
    pub entry: ManifestEntry,
    pub reference: AudioBuffer<f64>,
}

fn stem_paths(dir: &Path, level: QualityLevel) -> (PathBuf, PathBuf) {
    (dir.join(format!("{}_dialogue.wav", level.as_str())), dir.join(format!("{}_background.wav", level.as_str())))
}

pub fn prepare_item(entry: &ManifestEntry, config: &BatchConfig) -> Result<PreparedItem, BatchError> {
    if selected_methods(entry, config).contains(&ProcessingMethod::DE) && entry.stems.as_ref().is_none_or(|d| !d.is_dir()) {
        return Err(BatchError::MissingStems { item_id: entry.item_id.clone() });
    }
    let audio: AudioBuffer<f64> =
        read_wav(&entry.path).map_err(|source| BatchError::Audio { path: entry.path.clone(), source })?;
    let reference = generate_reference(&audio, config.target_lufs)
        .map_err(|source| BatchError::Generation { item_id: entry.item_id.clone(), source })?;
    Ok(PreparedItem { entry: entry.clone(), reference })
}

fn render(item: &PreparedItem, job: &Job, config: &BatchConfig) -> Result<(AudioBuffer<f64>, Option<ArtifactParams>), BatchError> {
    let gen_err = |source| BatchError::Generation { item_id: job.item_id.clone(), source };
    let target = config.target_lufs;
    match job.condition {
        Condition::Reference => Ok((item.reference.clone(), None)),
        Condition::Anchor35 | Condition::Anchor70 => {
            let cutoff = ANCHOR_CUTOFFS_HZ[usize::from(job.condition == Condition::Anchor70)];
            let anchor = generate_anchor(&item.reference, cutoff, target).map_err(gen_err)?;
            Ok((anchor, Some(ArtifactParams::Lp { cutoff_hz: cutoff })))
        }
        Condition::Level(q) if job.method == ProcessingMethod::DE => {
            let dir = item.entry.stems.as_ref().ok_or_else(|| BatchError::MissingStems { item_id: job.item_id.clone() })?;
            let (d, b) = stem_paths(dir, q);
            let load = |p: &Path| read_wav::<f64>(p).map_err(|source| BatchError::Audio { path: p.to_path_buf(), source });
            let mixed = remix_de(&load(&d)?, &load(&b)?, config.de_attenuation_db).map_err(gen_err)?;
            // remix_de normalises to the fixed target; honour a custom one.
            let mixed = generate_reference(&mixed, target).map_err(gen_err)?;
            Ok((mixed, Some(ArtifactParams::De { attenuation_db: config.de_attenuation_db })))
        }
        Condition::Level(q) => {
            let (out, params) = generate_condition(&item.reference, job.method, q, job.seed, target).map_err(gen_err)?;
            Ok((out, Some(params)))
        }
    }
}

/// Produce one stimulus and its sidecar.
pub fn run_job(item: &PreparedItem, job: &Job, config: &BatchConfig) -> Result<PathBuf, BatchError> {
    let (audio, params) = render(item, job, config)?;
    let report = write_wav(&audio, &job.output, config.bit_depth)
        .map_err(|source| BatchError::Audio { path: job.output.clone(), source })?;
    let stochastic = matches!(job.condition, Condition::Level(_))
        && matches!(job.method, ProcessingMethod::UN | ProcessingMethod::SH | ProcessingMethod::PE);
    let sidecar = Sidecar {
        item_id: job.item_id.clone(),
        method: job.condition.level().map(|_| job.method),
        condition: job.condition,
        source: item.entry.path.display().to_string(),
        master_seed: config.master_seed,
        seed: stochastic.then_some(job.seed),
        params,
        loudness_target_lufs: config.target_lufs,
        clipped_samples: report.clipped,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
    let side = job.sidecar_path();
    std::fs::write(&side, json + "\n").map_err(|source| BatchError::Io { path: side, source })?;
    if report.clipped > 0 {
        log::warn!("{}: {} samples clipped", job.output.display(), report.clipped);
    }
    Ok(job.output.clone())
}

/// Generate every job of one item sequentially.
pub fn run_item(entry: &ManifestEntry, config: &BatchConfig) -> Result<Vec<PathBuf>, BatchError> {
    let item = prepare_item(entry, config)?;
    plan_item(entry, config).iter().map(|job| run_job(&item, job, config)).collect()
}
