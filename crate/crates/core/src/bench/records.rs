use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::labels::{Cohort, Condition, ProcessingMethod};

use super::{BenchError, Result};

/// Trials each listener grades in a full test.
pub const EXPECTED_TRIALS: usize = 30;
/// Conditions per trial.
pub const CONDITIONS_PER_TRIAL: usize = 8;

/// One subjective grade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub listener_id: String,
    pub cohort: Cohort,
    pub session: u8,
    pub trial_index: u32,
    pub item_id: String,
    pub method: ProcessingMethod,
    pub condition: Condition,
    pub score: f64,
}

pub const CANONICAL_COLUMNS: [&str; 8] =
    ["listener_id", "cohort", "session", "trial_index", "item_id", "method", "condition", "score"];

/// Maps canonical column names to the column names of a source file.
/// Columns not listed keep their canonical name.
///
/// ```toml
/// [columns]
/// listener_id = "subject"
/// score = "rating"
/// ```
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
pub struct ColumnMapping {
    #[serde(default)]
    pub columns: BTreeMap<String, String>,
}

impl ColumnMapping {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mapping: Self = toml::from_str(text).map_err(|e| BenchError::Mapping(e.to_string()))?;
        if let Some(bad) = mapping.columns.keys().find(|k| !CANONICAL_COLUMNS.contains(&k.as_str())) {
            return Err(BenchError::Mapping(format!("unknown canonical column {bad:?}")));
        }
        Ok(mapping)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn source_column<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.columns.get(canonical).map(String::as_str).unwrap_or(canonical)
    }
}

/// Per-listener completeness against the full test design.
#[derive(Clone, Debug, PartialEq)]
pub struct ListenerCompleteness {
    pub listener_id: String,
    pub trials: usize,
    pub records: usize,
    /// Trials with fewer or more than eight graded conditions.
    pub incomplete_trials: Vec<(u8, u32)>,
}

impl ListenerCompleteness {
    pub fn is_complete(&self) -> bool {
        self.trials == EXPECTED_TRIALS && self.incomplete_trials.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadedScores {
    pub records: Vec<ScoreRecord>,
    pub completeness: Vec<ListenerCompleteness>,
    pub warnings: Vec<String>,
}

/// Parse one score file, applying `mapping` to locate columns.
pub fn read_score_records(reader: impl Read, origin: &str, mapping: &ColumnMapping) -> Result<Vec<ScoreRecord>> {
    let bad = |line: usize, message: String| BenchError::Validation { origin: origin.to_string(), line, message };
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let mut index = HashMap::new();
    for col in CANONICAL_COLUMNS {
        let src = mapping.source_column(col);
        let i = headers.iter().position(|h| h == src).ok_or_else(|| bad(1, format!("missing column {src:?} (for {col})")))?;
        index.insert(col, i);
    }
    let mut out = Vec::new();
    for (n, row) in csv.records().enumerate() {
        let line = n + 2;
        let row = row.map_err(|e| bad(line, e.to_string()))?;
        let field = |col: &str| row.get(index[col]).unwrap_or("");
        let parse_err = |col: &str, e: String| bad(line, format!("{col}: {e}"));
        let listener_id = field("listener_id").to_string();
        if listener_id.is_empty() {
            return Err(bad(line, "empty listener_id".into()));
        }
        let cohort: Cohort = field("cohort").parse().map_err(|e| parse_err("cohort", format!("{e}")))?;
        let session: u8 = field("session").parse().map_err(|_| parse_err("session", format!("{:?} is not an integer", field("session"))))?;
        if !(1..=3).contains(&session) {
            return Err(parse_err("session", format!("{session} outside 1..=3")));
        }
        let trial_index: u32 = field("trial_index")
            .parse()
            .map_err(|_| parse_err("trial_index", format!("{:?} is not an integer", field("trial_index"))))?;
        let item_id = field("item_id").to_string();
        let method: ProcessingMethod = field("method").parse().map_err(|e| parse_err("method", format!("{e}")))?;
        let condition: Condition = field("condition").parse().map_err(|e| parse_err("condition", format!("{e}")))?;
        let score: f64 = field("score").parse().map_err(|_| parse_err("score", format!("{:?} is not a number", field("score"))))?;
        if !(0.0..=100.0).contains(&score) {
            return Err(parse_err("score", format!("{score} outside [0, 100]")));
        }
        out.push(ScoreRecord { listener_id, cohort, session, trial_index, item_id, method, condition, score });
    }
    Ok(out)
}

/// Completeness of each listener's records, in listener order.
pub fn completeness(records: &[ScoreRecord]) -> Vec<ListenerCompleteness> {
    let mut per: BTreeMap<&str, BTreeMap<(u8, u32), usize>> = BTreeMap::new();
    for r in records {
        *per.entry(&r.listener_id).or_default().entry((r.session, r.trial_index)).or_default() += 1;
    }
    per.into_iter()
        .map(|(id, trials)| ListenerCompleteness {
            listener_id: id.to_string(),
            trials: trials.len(),
            records: trials.values().sum(),
            incomplete_trials: trials.iter().filter(|(_, &n)| n != CONDITIONS_PER_TRIAL).map(|(k, _)| *k).collect(),
        })
        .collect()
}

/// Load and validate score files. Incomplete listeners are reported as
/// warnings; duplicate grades are an error.
pub fn load_scores(paths: &[PathBuf], mapping: &ColumnMapping) -> Result<LoadedScores> {
    let mut records = Vec::new();
    for path in paths {
        let file = std::fs::File::open(path).map_err(|source| BenchError::Io { path: path.clone(), source })?;
        records.extend(read_score_records(file, &path.display().to_string(), mapping)?);
    }
    from_records(records)
}

/// Validate an in-memory record set the same way as [`load_scores`].
pub fn from_records(records: Vec<ScoreRecord>) -> Result<LoadedScores> {
    let mut seen = BTreeSet::new();
    let mut cohorts: HashMap<&str, Cohort> = HashMap::new();
    for r in &records {
        if !seen.insert((&r.listener_id, r.session, r.trial_index, r.condition)) {
            return Err(BenchError::Validation {
                origin: "scores".into(),
                line: 0,
                message: format!(
                    "duplicate grade: listener {} session {} trial {} condition {}",
                    r.listener_id, r.session, r.trial_index, r.condition
                ),
            });
        }
        if let Some(prev) = cohorts.insert(&r.listener_id, r.cohort) {
            if prev != r.cohort {
                return Err(BenchError::Validation {
                    origin: "scores".into(),
                    line: 0,
                    message: format!("listener {} appears in cohorts {prev} and {}", r.listener_id, r.cohort),
                });
            }
        }
    }
    let completeness = completeness(&records);
    let warnings = completeness
        .iter()
        .filter(|c| !c.is_complete())
        .map(|c| {
            format!(
                "listener {}: {} of {EXPECTED_TRIALS} trials, {} records, {} incomplete trials",
                c.listener_id,
                c.trials,
                c.records,
                c.incomplete_trials.len()
            )
        })
        .collect();
    Ok(LoadedScores { records, completeness, warnings })
}

pub fn write_score_records(writer: impl Write, records: &[ScoreRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| BenchError::Io { path: PathBuf::from("<output>"), source: e.into() };
    w.write_record(CANONICAL_COLUMNS).map_err(io)?;
    for r in records {
        w.write_record([
            r.listener_id.as_str(),
            r.cohort.as_str(),
            &r.session.to_string(),
            &r.trial_index.to_string(),
            &r.item_id,
            r.method.as_str(),
            r.condition.as_str(),
            &r.score.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| BenchError::Io { path: PathBuf::from("<output>"), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::QualityLevel;

    pub(crate) fn full_listener(id: &str, cohort: Cohort) -> Vec<ScoreRecord> {
        let mut out = Vec::new();
        for t in 0..EXPECTED_TRIALS as u32 {
            for c in Condition::ALL {
                out.push(ScoreRecord {
                    listener_id: id.into(),
                    cohort,
                    session: (t / 10 + 1) as u8,
                    trial_index: t,
                    item_id: format!("item{}", t % 6),
                    method: ProcessingMethod::ALL[(t % 6) as usize],
                    condition: c,
                    score: 10.0 * c.index() as f64,
                });
            }
        }
        out
    }

    #[test]
    fn complete_listener_round_trip() {
        let recs = full_listener("L1", Cohort::A);
        let mut buf = Vec::new();
        write_score_records(&mut buf, &recs).unwrap();
        let back = read_score_records(buf.as_slice(), "t", &ColumnMapping::default()).unwrap();
        assert_eq!(back.len(), 240);
        assert_eq!(back, recs);
        let loaded = from_records(back).unwrap();
        assert!(loaded.warnings.is_empty());
        assert!(loaded.completeness[0].is_complete());
    }

    #[test]
    fn validation_errors() {
        let head = "listener_id,cohort,session,trial_index,item_id,method,condition,score\n";
        for row in [
            "L,A,1,0,x,LP,Q1,101",
            "L,C,1,0,x,LP,Q1,50",
            "L,A,4,0,x,LP,Q1,50",
            "L,A,1,0,x,LP,anchor,50",
            "L,A,1,0,x,LP,Q1,abc",
        ] {
            let text = format!("{head}{row}\n");
            let r = read_score_records(text.as_bytes(), "t", &ColumnMapping::default());
            assert!(matches!(r, Err(BenchError::Validation { line: 2, .. })), "{row}");
        }
    }

    #[test]
    fn missing_trial_is_a_warning() {
        let mut recs = full_listener("L1", Cohort::B1);
        recs.retain(|r| r.trial_index != 7);
        let loaded = from_records(recs).unwrap();
        assert_eq!(loaded.records.len(), 232);
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.completeness[0].trials, 29);
    }

    #[test]
    fn duplicates_are_rejected() {
        let mut recs = full_listener("L1", Cohort::A);
        recs.push(recs[3].clone());
        assert!(from_records(recs).is_err());
    }

    #[test]
    fn column_mapping() {
        let mapping = ColumnMapping::from_toml("[columns]\nlistener_id = \"subject\"\nscore = \"rating\"\n").unwrap();
        let text = "subject,cohort,session,trial_index,item_id,method,condition,rating\nS9,B2,2,11,x,TM,Q3,42.5\n";
        let recs = read_score_records(text.as_bytes(), "t", &mapping).unwrap();
        assert_eq!(recs[0].listener_id, "S9");
        assert_eq!(recs[0].condition, Condition::Level(QualityLevel::Q3));
        assert_eq!(recs[0].score, 42.5);
        assert!(ColumnMapping::from_toml("[columns]\nbogus = \"x\"\n").is_err());
    }
}
