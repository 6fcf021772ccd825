use serde::{Deserialize, Serialize};

use crate::labels::{ProcessingMethod, QualityLevel};
use crate::signal::MDCT_BLOCK_LENGTHS;

use super::{ArtifactError, Result};

/// Low-pass cutoffs of the two MUSHRA anchors.
pub const ANCHOR_CUTOFFS_HZ: [f64; 2] = [3500.0, 7000.0];

const LP_CUTOFF_HZ: [f64; 5] = [5000.0, 9000.0, 10_500.0, 12_000.0, 15_000.0];
const CROSSOVER_HZ: [f64; 5] = [3000.0, 5000.0, 7000.0, 9000.0, 10_500.0];
const HOLE_PROBABILITY: [f64; 5] = [0.70, 0.50, 0.30, 0.20, 0.10];
const PRE_ECHO: [(f64, usize); 5] = [(10.0, 4096), (10.0, 2048), (10.0, 1024), (16.0, 2048), (16.0, 1024)];

/// Generation parameters for one method. Stochastic generators carry their seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum ArtifactParams {
    #[serde(rename = "LP")]
    Lp { cutoff_hz: f64 },
    #[serde(rename = "TM")]
    Tm { crossover_hz: f64 },
    #[serde(rename = "UN")]
    Un { crossover_hz: f64, seed: u64 },
    #[serde(rename = "SH")]
    Sh { hole_prob: f64, seed: u64 },
    #[serde(rename = "PE")]
    Pe { nmr_db: f64, block_length: usize, seed: u64 },
    #[serde(rename = "DE")]
    De { attenuation_db: f64 },
}

impl ArtifactParams {
    pub fn method(&self) -> ProcessingMethod {
        match self {
            Self::Lp { .. } => ProcessingMethod::LP,
            Self::Tm { .. } => ProcessingMethod::TM,
            Self::Un { .. } => ProcessingMethod::UN,
            Self::Sh { .. } => ProcessingMethod::SH,
            Self::Pe { .. } => ProcessingMethod::PE,
            Self::De { .. } => ProcessingMethod::DE,
        }
    }

    /// Replace the seed of a stochastic generator; other variants are unchanged.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            Self::Un { crossover_hz, .. } => Self::Un { crossover_hz, seed: new_seed },
            Self::Sh { hole_prob, .. } => Self::Sh { hole_prob, seed: new_seed },
            Self::Pe { nmr_db, block_length, .. } => Self::Pe { nmr_db, block_length, seed: new_seed },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ArtifactError::Parameter(msg));
        match *self {
            Self::Lp { cutoff_hz } | Self::Tm { crossover_hz: cutoff_hz } | Self::Un { crossover_hz: cutoff_hz, .. }
                if !(cutoff_hz > 0.0 && cutoff_hz.is_finite()) =>
            {
                bad(format!("frequency {cutoff_hz} Hz must be positive"))
            }
            Self::Sh { hole_prob, .. } if !(hole_prob > 0.0 && hole_prob < 1.0) => {
                bad(format!("hole probability {hole_prob} outside (0, 1)"))
            }
            Self::Pe { block_length, .. } if !MDCT_BLOCK_LENGTHS.contains(&block_length) => {
                bad(format!("block length {block_length} not in {MDCT_BLOCK_LENGTHS:?}"))
            }
            Self::Pe { nmr_db, .. } if !nmr_db.is_finite() => bad("NMR must be finite".into()),
            Self::De { attenuation_db } if !attenuation_db.is_finite() => bad("attenuation must be finite".into()),
            _ => Ok(()),
        }
    }
}

/// Preset for `(method, level)`. Seeds are zero; see [`ArtifactParams::with_seed`].
pub fn params_for(method: ProcessingMethod, level: QualityLevel) -> Result<ArtifactParams> {
    let i = level.index();
    Ok(match method {
        ProcessingMethod::LP => ArtifactParams::Lp { cutoff_hz: LP_CUTOFF_HZ[i] },
        ProcessingMethod::TM => ArtifactParams::Tm { crossover_hz: CROSSOVER_HZ[i] },
        ProcessingMethod::UN => ArtifactParams::Un { crossover_hz: CROSSOVER_HZ[i], seed: 0 },
        ProcessingMethod::SH => ArtifactParams::Sh { hole_prob: HOLE_PROBABILITY[i], seed: 0 },
        ProcessingMethod::PE => {
            let (nmr_db, block_length) = PRE_ECHO[i];
            ArtifactParams::Pe { nmr_db, block_length, seed: 0 }
        }
        ProcessingMethod::DE => return Err(ArtifactError::Unsupported(method)),
    })
}
