//! Controlled audio-coding degradations, objective quality metrics and
//! MUSHRA listening-test analysis.
//!
//! The DSP and statistics kernels are generic over the sample type through
//! [`scalar::Real`]; the aliases below fix the `f64` pipeline used by the
//! generators and tools.

pub mod artifacts;
pub mod bench;
pub mod labels;
pub mod metrics;
pub mod scalar;
pub mod session;
pub mod signal;
pub mod stimuli;

pub use labels::{Cohort, Condition, ProcessingMethod, QualityLevel};
pub use scalar::{Real, Sample};

pub type Buffer = signal::AudioBuffer<f64>;
pub type BufferF32 = signal::AudioBuffer<f32>;
pub type Spectrogram = signal::Spectrogram<f64>;
pub type MdctFrames = signal::MdctFrames<f64>;
