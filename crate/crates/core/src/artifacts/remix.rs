use crate::scalar::Real;
use crate::signal::{normalize_loudness, AudioBuffer};

use super::{ArtifactError, Result, LOUDNESS_TARGET_LUFS};

pub const DEFAULT_BACKGROUND_ATTENUATION_DB: f64 = 20.0;

/// Dialogue-enhancement remix: `dialogue + background * 10^(-attenuation/20)`,
/// loudness-normalised.
pub fn remix_de<T: Real>(dialogue: &AudioBuffer<T>, background: &AudioBuffer<T>, attenuation_db: f64) -> Result<AudioBuffer<T>> {
    if dialogue.len() != background.len()
        || dialogue.sample_rate() != background.sample_rate()
        || dialogue.num_channels() != background.num_channels()
    {
        return Err(ArtifactError::Arity(format!(
            "dialogue ({} ch, {} samples @ {} Hz) and background ({} ch, {} samples @ {} Hz) differ",
            dialogue.num_channels(),
            dialogue.len(),
            dialogue.sample_rate(),
            background.num_channels(),
            background.len(),
            background.sample_rate()
        )));
    }
    let g = T::lit(10f64.powf(-attenuation_db / 20.0));
    let mixed = dialogue.map_channels(|c, d| d.iter().zip(background.channel(c)).map(|(&a, &b)| a + b * g).collect())?;
    Ok(normalize_loudness(&mixed, LOUDNESS_TARGET_LUFS)?)
}
