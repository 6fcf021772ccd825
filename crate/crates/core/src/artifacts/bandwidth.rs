use crate::scalar::Real;
use crate::signal::{lowpass, AudioBuffer};

use super::{ArtifactError, ArtifactParams, Result};

/// Bandwidth limitation; the same filter produces the MUSHRA anchors.
pub fn apply_lp<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    let ArtifactParams::Lp { cutoff_hz } = *params else {
        return Err(ArtifactError::Parameter(format!("expected LP parameters, got {:?}", params.method())));
    };
    params.validate()?;
    Ok(lowpass(buffer, cutoff_hz)?)
}
