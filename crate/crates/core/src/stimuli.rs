//! Stimulus file naming and directory scanning shared by generation,
//! measurement and the listening-test service.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::artifacts::ArtifactParams;
use crate::labels::{Condition, ProcessingMethod, QualityLevel};

const SEP: &str = "__";

/// File stem (without extension) of one stimulus. Reference and anchors are
/// shared by every method of an item, so they carry no method.
pub fn stimulus_stem(item_id: &str, method: ProcessingMethod, condition: Condition) -> String {
    match condition {
        Condition::Reference => format!("{item_id}{SEP}ref"),
        Condition::Anchor35 | Condition::Anchor70 => format!("{item_id}{SEP}{}", condition.as_str()),
        Condition::Level(q) => format!("{item_id}{SEP}{}{SEP}{}", method.as_str(), q.as_str()),
    }
}

pub fn stimulus_file_name(item_id: &str, method: ProcessingMethod, condition: Condition) -> String {
    format!("{}.wav", stimulus_stem(item_id, method, condition))
}

/// What a stimulus file name encodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StimulusName {
    pub item_id: String,
    /// `None` for the shared reference and anchors.
    pub method: Option<ProcessingMethod>,
    pub condition: Condition,
}

/// Inverse of [`stimulus_file_name`]; `None` for unrelated files.
pub fn parse_stimulus_name(file_name: &str) -> Option<StimulusName> {
    let stem = file_name.strip_suffix(".wav")?;
    let parts: Vec<&str> = stem.split(SEP).collect();
    match parts.as_slice() {
        [item, "ref"] => Some(StimulusName { item_id: item.to_string(), method: None, condition: Condition::Reference }),
        [item, "anchor35"] => Some(StimulusName { item_id: item.to_string(), method: None, condition: Condition::Anchor35 }),
        [item, "anchor70"] => Some(StimulusName { item_id: item.to_string(), method: None, condition: Condition::Anchor70 }),
        [item, method, level] if !item.is_empty() => {
            let method: ProcessingMethod = method.parse().ok()?;
            let level: QualityLevel = level.parse().ok()?;
            Some(StimulusName { item_id: item.to_string(), method: Some(method), condition: Condition::Level(level) })
        }
        _ => None,
    }
}

/// Provenance written next to every generated stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub item_id: String,
    pub method: Option<ProcessingMethod>,
    pub condition: Condition,
    pub source: String,
    pub master_seed: u64,
    pub seed: Option<u64>,
    pub params: Option<ArtifactParams>,
    pub loudness_target_lufs: f64,
    pub clipped_samples: usize,
}

/// Stimulus files of one item found on disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ItemStimuli {
    pub reference: Option<PathBuf>,
    pub anchor35: Option<PathBuf>,
    pub anchor70: Option<PathBuf>,
    pub levels: BTreeMap<(ProcessingMethod, QualityLevel), PathBuf>,
}

impl ItemStimuli {
    pub fn methods(&self) -> Vec<ProcessingMethod> {
        let mut m: Vec<_> = self.levels.keys().map(|(m, _)| *m).collect();
        m.dedup();
        m
    }

    pub fn path(&self, method: ProcessingMethod, condition: Condition) -> Option<&Path> {
        match condition {
            Condition::Reference => self.reference.as_deref(),
            Condition::Anchor35 => self.anchor35.as_deref(),
            Condition::Anchor70 => self.anchor70.as_deref(),
            Condition::Level(q) => self.levels.get(&(method, q)).map(PathBuf::as_path),
        }
    }

    /// Conditions of a `(item, method)` trial with no file on disk.
    pub fn missing(&self, method: ProcessingMethod) -> Vec<Condition> {
        Condition::ALL.into_iter().filter(|c| self.path(method, *c).is_none()).collect()
    }
}

/// All stimuli in a directory, keyed by item.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StimulusIndex {
    pub root: PathBuf,
    pub items: BTreeMap<String, ItemStimuli>,
}

impl StimulusIndex {
    pub fn scan(dir: &Path) -> io::Result<Self> {
        let mut names: Vec<PathBuf> = std::fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<io::Result<_>>()?;
        names.sort();
        let mut items: BTreeMap<String, ItemStimuli> = BTreeMap::new();
        for path in names {
            let Some(name) = path.file_name().and_then(|n| n.to_str()).and_then(parse_stimulus_name) else {
                continue;
            };
            let entry = items.entry(name.item_id).or_default();
            match (name.condition, name.method) {
                (Condition::Reference, _) => entry.reference = Some(path),
                (Condition::Anchor35, _) => entry.anchor35 = Some(path),
                (Condition::Anchor70, _) => entry.anchor70 = Some(path),
                (Condition::Level(q), Some(m)) => {
                    entry.levels.insert((m, q), path);
                }
                (Condition::Level(_), None) => unreachable!("level names always carry a method"),
            }
        }
        Ok(Self { root: dir.to_path_buf(), items })
    }

    pub fn get(&self, item_id: &str) -> Option<&ItemStimuli> {
        self.items.get(item_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in ProcessingMethod::ALL {
            for c in Condition::ALL {
                let name = stimulus_file_name("castanets_01", m, c);
                let parsed = parse_stimulus_name(&name).unwrap();
                assert_eq!(parsed.item_id, "castanets_01");
                assert_eq!(parsed.condition, c);
                assert_eq!(parsed.method, c.level().map(|_| m));
            }
        }
        assert_eq!(stimulus_file_name("x", ProcessingMethod::PE, Condition::Level(QualityLevel::Q3)), "x__PE__Q3.wav");
        assert_eq!(stimulus_file_name("x", ProcessingMethod::PE, Condition::Reference), "x__ref.wav");
    }

    #[test]
    fn ignores_foreign_files() {
        assert_eq!(parse_stimulus_name("notes.txt"), None);
        assert_eq!(parse_stimulus_name("x__ref.json"), None);
        assert_eq!(parse_stimulus_name("x__XX__Q1.wav"), None);
        assert_eq!(parse_stimulus_name("x.wav"), None);
    }

    #[test]
    fn scan_collects_items() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a__ref.wav", "a__anchor35.wav", "a__LP__Q1.wav", "a__LP__Q1.json", "b__SH__Q5.wav", "readme.md"] {
            std::fs::write(dir.path().join(f), b"").unwrap();
        }
        let idx = StimulusIndex::scan(dir.path()).unwrap();
        assert_eq!(idx.items.len(), 2);
        let a = idx.get("a").unwrap();
        assert_eq!(a.methods(), vec![ProcessingMethod::LP]);
        assert_eq!(a.missing(ProcessingMethod::LP).len(), 5);
        assert!(idx.get("b").unwrap().reference.is_none());
    }
}
