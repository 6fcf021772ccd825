//! Foundational DSP: buffers, WAV I/O, short-time and lapped transforms,
//! mid/side stereo, loudness and filtering.

mod bark;
mod buffer;
mod filter;
mod loudness;
mod mdct;
mod spectrum;
mod stereo;
mod stft;
mod wav;

use thiserror::Error;

pub use bark::{bark_to_hz, critical_band_edges, hz_to_bark, Band, BandLayout};
pub use buffer::AudioBuffer;
pub use filter::{design_lowpass, lowpass};
pub use loudness::{integrated_loudness, loudness_gain_db, normalize_loudness, Loudness};
pub use mdct::{imdct, mdct, MdctConfig, MdctFrames, MDCT_BLOCK_LENGTHS};
pub use spectrum::{log_spectral_distance, spectral_flatness, welch_psd};
pub use stereo::{downmix_mono, ms_decode, ms_encode};
pub use stft::{istft, stft, Spectrogram, StftConfig, Window};
pub use wav::{read_wav, write_wav, BitDepth, WriteReport};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported or malformed audio file: {0}")]
    Format(String),
    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),
    #[error("invalid transform configuration: {0}")]
    Config(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("channel or length mismatch: {0}")]
    Arity(String),
    #[error("loudness measurement failed: {0}")]
    Measurement(String),
    #[error("signal is below the loudness gate")]
    BelowGate,
}

pub type Result<T, E = SignalError> = std::result::Result<T, E>;
