//! Vocabulary shared by generation, measurement, the listening test and the
//! benchmark: processing methods, quality levels and condition labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown {kind} label `{label}`")]
pub struct LabelError {
    pub kind: &'static str,
    pub label: String,
}

/// Degradation family of a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessingMethod {
    /// Bandwidth limitation.
    LP,
    /// Tonality mismatch: noise-like content replaced by tones.
    TM,
    /// Unmasked noise: tonal content replaced by noise.
    UN,
    /// Spectral holes.
    SH,
    /// Pre-echo.
    PE,
    /// Dialogue enhancement remix of externally separated stems.
    DE,
}

impl ProcessingMethod {
    pub const ALL: [ProcessingMethod; 6] = [Self::LP, Self::TM, Self::UN, Self::SH, Self::PE, Self::DE];

    /// Methods with a native parametric generator.
    pub const GENERATED: [ProcessingMethod; 5] = [Self::LP, Self::TM, Self::UN, Self::SH, Self::PE];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::LP => "LP",
            Self::TM => "TM",
            Self::UN => "UN",
            Self::SH => "SH",
            Self::PE => "PE",
            Self::DE => "DE",
        }
    }
}

impl fmt::Display for ProcessingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcessingMethod {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError { kind: "method", label: s.to_string() })
    }
}

/// Q1 is the worst quality level, Q5 the best.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityLevel {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
}

impl QualityLevel {
    pub const ALL: [QualityLevel; 5] = [Self::Q1, Self::Q2, Self::Q3, Self::Q4, Self::Q5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        ["Q1", "Q2", "Q3", "Q4", "Q5"][self.index()]
    }
}

impl fmt::Display for QualityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityLevel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|q| q.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError { kind: "quality level", label: s.to_string() })
    }
}

/// One of the eight graded conditions of a MUSHRA trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Reference,
    Anchor35,
    Anchor70,
    Level(QualityLevel),
}

impl Condition {
    /// Trial order of the eight conditions (before shuffling).
    pub const ALL: [Condition; 8] = [
        Self::Reference,
        Self::Anchor35,
        Self::Anchor70,
        Self::Level(QualityLevel::Q1),
        Self::Level(QualityLevel::Q2),
        Self::Level(QualityLevel::Q3),
        Self::Level(QualityLevel::Q4),
        Self::Level(QualityLevel::Q5),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Reference => "reference",
            Self::Anchor35 => "anchor35",
            Self::Anchor70 => "anchor70",
            Self::Level(q) => q.as_str(),
        }
    }

    pub fn level(self) -> Option<QualityLevel> {
        match self {
            Self::Level(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_anchor(self) -> bool {
        matches!(self, Self::Anchor35 | Self::Anchor70)
    }

    pub fn index(self) -> usize {
        match self {
            Self::Reference => 0,
            Self::Anchor35 => 1,
            Self::Anchor70 => 2,
            Self::Level(q) => 3 + q.index(),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "reference" => Ok(Self::Reference),
            "anchor35" => Ok(Self::Anchor35),
            "anchor70" => Ok(Self::Anchor70),
            _ => t
                .parse::<QualityLevel>()
                .map(Self::Level)
                .map_err(|_| LabelError { kind: "condition", label: s.to_string() }),
        }
    }
}

macro_rules! serde_via_str {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(Condition);

/// Listener cohort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cohort {
    A,
    B1,
    B2,
}

impl Cohort {
    pub const ALL: [Cohort; 3] = [Self::A, Self::B1, Self::B2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B1 => "B1",
            Self::B2 => "B2",
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cohort {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError { kind: "cohort", label: s.to_string() })
    }
}

serde_via_str!(Cohort);
