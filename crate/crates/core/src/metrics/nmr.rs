use crate::artifacts::MaskingModel;
use crate::scalar::Real;
use crate::signal::{downmix_mono, stft, AudioBuffer, StftConfig};

use super::{check_pair, Result};

/// Reported for an error signal with no energy.
pub const NMR_FLOOR_DB: f64 = -120.0;

pub const NMR_FRAME_LENGTH: usize = 2048;

fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(NMR_FLOOR_DB)
    } else {
        NMR_FLOOR_DB
    }
}

fn frame_ratios<T: Real>(reference: &AudioBuffer<T>, test: &AudioBuffer<T>) -> Result<Vec<f64>> {
    check_pair(reference, test)?;
    let reference = downmix_mono(reference);
    let test = downmix_mono(test);
    let error = test.map_channels(|_, t| t.iter().zip(reference.channel(0)).map(|(&a, &b)| a - b).collect())?;

    let config = StftConfig::sine(NMR_FRAME_LENGTH)?;
    let layout = config.band_layout(reference.sample_rate());
    let model = MaskingModel::new(&layout);
    let ref_spec = stft(&reference, &config)?;
    let err_spec = stft(&error, &config)?;

    Ok((0..ref_spec.num_frames())
        .map(|m| {
            let mask = model.threshold(&ref_spec.frame_power(0, m), &layout);
            let noise = layout.band_energies(&err_spec.frame_power(0, m));
            let sum: f64 = noise.iter().zip(&mask.thresholds).map(|(n, t)| n.as_f64() / t.as_f64()).sum();
            sum / noise.len() as f64
        })
        .collect())
}

/// Per-frame noise-to-mask ratio in dB.
pub fn nmr_profile<T: Real>(reference: &AudioBuffer<T>, test: &AudioBuffer<T>) -> Result<Vec<f64>> {
    Ok(frame_ratios(reference, test)?.into_iter().map(to_db).collect())
}

/// Noise-to-mask ratio of `test` against `reference` in dB: the band-averaged
/// ratio of error energy to the reference's masked threshold, averaged
/// linearly over frames. Stereo input is downmixed first.
pub fn nmr<T: Real>(reference: &AudioBuffer<T>, test: &AudioBuffer<T>) -> Result<f64> {
    let ratios = frame_ratios(reference, test)?;
    if ratios.is_empty() {
        return Ok(NMR_FLOOR_DB);
    }
    Ok(to_db(ratios.iter().sum::<f64>() / ratios.len() as f64))
}
