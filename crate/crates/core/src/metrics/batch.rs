use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::labels::{Condition, ProcessingMethod};
use crate::signal::{read_wav, AudioBuffer};
use crate::stimuli::StimulusIndex;

use super::{nmr, si_sdr, MetricError, MetricScore, Result};

/// Metrics implemented natively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NativeMetric {
    Nmr,
    SiSdr,
}

impl NativeMetric {
    pub const ALL: [NativeMetric; 2] = [Self::Nmr, Self::SiSdr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nmr => "NMR",
            Self::SiSdr => "SI-SDR",
        }
    }

    pub fn measure(self, reference: &AudioBuffer<f64>, test: &AudioBuffer<f64>) -> Result<f64> {
        match self {
            Self::Nmr => nmr(reference, test),
            Self::SiSdr => si_sdr(reference, test),
        }
    }
}

impl fmt::Display for NativeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NativeMetric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match norm.as_str() {
            "nmr" => Ok(Self::Nmr),
            "sisdr" => Ok(Self::SiSdr),
            _ => Err(MetricError::Validation { path: "--metric".into(), message: format!("unknown metric {s:?}; expected NMR or SI-SDR") }),
        }
    }
}

/// One stimulus to score against its item's reference. Reference and
/// anchors are scored once and reported for every method of the item.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureJob {
    pub item_id: String,
    pub reference: PathBuf,
    pub test: PathBuf,
    /// Trials reported with this score.
    pub slots: Vec<(ProcessingMethod, Condition)>,
}

/// Enumerate scoring jobs for a stimulus directory.
pub fn plan_measurements(index: &StimulusIndex) -> Result<Vec<MeasureJob>> {
    let mut jobs = Vec::new();
    for (item_id, item) in &index.items {
        let reference = item
            .reference
            .clone()
            .ok_or_else(|| MetricError::Manifest(format!("item {item_id} has no {item_id}__ref.wav")))?;
        let methods = item.methods();
        for (condition, path) in [
            (Condition::Reference, &item.reference),
            (Condition::Anchor35, &item.anchor35),
            (Condition::Anchor70, &item.anchor70),
        ] {
            if let Some(p) = path {
                if !methods.is_empty() {
                    let slots = methods.iter().map(|m| (*m, condition)).collect();
                    jobs.push(MeasureJob { item_id: item_id.clone(), reference: reference.clone(), test: p.clone(), slots });
                }
            }
        }
        for ((m, q), p) in &item.levels {
            jobs.push(MeasureJob {
                item_id: item_id.clone(),
                reference: reference.clone(),
                test: p.clone(),
                slots: vec![(*m, Condition::Level(*q))],
            });
        }
    }
    Ok(jobs)
}

fn load(path: &PathBuf) -> Result<AudioBuffer<f64>> {
    read_wav(path).map_err(|e| match e {
        crate::signal::SignalError::Io(source) => MetricError::Io { path: path.display().to_string(), source },
        other => MetricError::Validation { path: path.display().to_string(), message: other.to_string() },
    })
}

pub fn measure_job(job: &MeasureJob, metric: NativeMetric) -> Result<Vec<MetricScore>> {
    let reference = load(&job.reference)?;
    let test = load(&job.test)?;
    let value = metric.measure(&reference, &test)?;
    Ok(job
        .slots
        .iter()
        .map(|&(method, condition)| MetricScore { metric: metric.name().into(), item_id: job.item_id.clone(), method, condition, value })
        .collect())
}

/// Score every stimulus of a directory; output order follows the plan.
pub fn measure_batch(index: &StimulusIndex, metric: NativeMetric) -> Result<Vec<MetricScore>> {
    let mut out = Vec::new();
    for job in plan_measurements(index)? {
        out.extend(measure_job(&job, metric)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{write_wav, BitDepth};
    use crate::stimuli::stimulus_file_name;

    fn tone(freq: f64, amp: f64) -> AudioBuffer<f64> {
        AudioBuffer::mono(48_000, (0..9600).map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 48_000.0).sin()).collect()).unwrap()
    }

    #[test]
    fn one_item_eight_scores() {
        let dir = tempfile::tempdir().unwrap();
        for (k, c) in Condition::ALL.into_iter().enumerate() {
            let name = stimulus_file_name("it", ProcessingMethod::SH, c);
            let b = if c == Condition::Reference { tone(440.0, 0.2) } else { tone(440.0 + k as f64, 0.2) };
            write_wav(&b, dir.path().join(name), BitDepth::Float32).unwrap();
        }
        let index = StimulusIndex::scan(dir.path()).unwrap();
        let a = measure_batch(&index, NativeMetric::SiSdr).unwrap();
        assert_eq!(a.len(), 8);
        let r = a.iter().find(|s| s.condition == Condition::Reference).unwrap();
        assert_eq!(r.value, crate::metrics::SI_SDR_CEILING_DB);
        assert_eq!(measure_batch(&index, NativeMetric::SiSdr).unwrap(), a);
        let n = measure_batch(&index, NativeMetric::Nmr).unwrap();
        assert_eq!(n.iter().find(|s| s.condition == Condition::Reference).unwrap().value, crate::metrics::NMR_FLOOR_DB);
    }

    #[test]
    fn missing_reference() {
        let dir = tempfile::tempdir().unwrap();
        write_wav(&tone(440.0, 0.1), dir.path().join("it__LP__Q1.wav"), BitDepth::Float32).unwrap();
        let index = StimulusIndex::scan(dir.path()).unwrap();
        assert!(matches!(measure_batch(&index, NativeMetric::Nmr), Err(MetricError::Manifest(_))));
    }

    #[test]
    fn metric_names() {
        assert_eq!("si-sdr".parse::<NativeMetric>().unwrap(), NativeMetric::SiSdr);
        assert_eq!("NMR".parse::<NativeMetric>().unwrap(), NativeMetric::Nmr);
        assert!("PESQ".parse::<NativeMetric>().is_err());
    }
}
