use crate::labels::{ProcessingMethod, QualityLevel};
use crate::scalar::Real;
use crate::signal::{lowpass, normalize_loudness, AudioBuffer};

use super::{apply_lp, apply_pe, apply_sh, apply_tm, apply_un, params_for, ArtifactError, ArtifactParams, Result};

pub const LOUDNESS_TARGET_LUFS: f64 = -23.0;

/// The hidden reference: the item normalised to the target loudness.
pub fn generate_reference<T: Real>(item: &AudioBuffer<T>, target_lufs: f64) -> Result<AudioBuffer<T>> {
    Ok(normalize_loudness(item, target_lufs)?)
}

/// Low-pass anchor of an already normalised reference.
pub fn generate_anchor<T: Real>(reference: &AudioBuffer<T>, cutoff_hz: f64, target_lufs: f64) -> Result<AudioBuffer<T>> {
    let filtered = lowpass(reference, cutoff_hz)?;
    Ok(normalize_loudness(&filtered, target_lufs)?)
}

/// Apply already-resolved parameters to a buffer.
pub fn apply_params<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    match params {
        ArtifactParams::Lp { .. } => apply_lp(buffer, params),
        ArtifactParams::Tm { .. } => apply_tm(buffer, params),
        ArtifactParams::Un { .. } => apply_un(buffer, params),
        ArtifactParams::Sh { .. } => apply_sh(buffer, params),
        ArtifactParams::Pe { .. } => apply_pe(buffer, params),
        ArtifactParams::De { .. } => Err(ArtifactError::Unsupported(ProcessingMethod::DE)),
    }
}

/// Normalise, degrade with the preset for `(method, level)` and normalise
/// again, since most degradations change loudness. Returns the stimulus and
/// the parameters actually used.
pub fn generate_condition<T: Real>(
    item: &AudioBuffer<T>,
    method: ProcessingMethod,
    level: QualityLevel,
    seed: u64,
    target_lufs: f64,
) -> Result<(AudioBuffer<T>, ArtifactParams)> {
    let params = params_for(method, level)?.with_seed(seed);
    let reference = generate_reference(item, target_lufs)?;
    let degraded = apply_params(&reference, &params)?;
    Ok((normalize_loudness(&degraded, target_lufs)?, params))
}
