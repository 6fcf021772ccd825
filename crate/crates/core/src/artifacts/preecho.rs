use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;
use crate::signal::{imdct, mdct, ms_decode, ms_encode, AudioBuffer, BandLayout, MdctConfig};

use super::{channel_rng, ArtifactError, ArtifactParams, MaskingModel, Result};

fn add_shaped_noise<T: Real>(channel: &AudioBuffer<T>, nmr_db: f64, config: &MdctConfig, seed: u64, stream: u64) -> Result<AudioBuffer<T>> {
    let layout = BandLayout::for_mdct(config.block_length(), channel.sample_rate());
    let model = MaskingModel::new(&layout);
    let ratio = 10f64.powf(nmr_db / 10.0);
    let mut frames = mdct(channel, config);
    let mut rng = channel_rng(seed, stream);
    let mut noise = Vec::new();

    for coefs in frames.channels[0].iter_mut() {
        let power: Vec<T> = coefs.iter().map(|&c| c * c).collect();
        let energies = layout.band_energies(&power);
        let threshold = model.threshold_from_bands(&energies);
        for ((band, energy), t) in layout.bands.iter().zip(&energies).zip(&threshold.thresholds) {
            // A band quantised from nothing stays nothing.
            if *energy <= T::zero() {
                continue;
            }
            noise.clear();
            noise.extend(band.bins.clone().map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                v
            }));
            let drawn: f64 = noise.iter().map(|v| v * v).sum();
            if drawn <= 0.0 {
                continue;
            }
            let g = (t.as_f64() * ratio / drawn).sqrt();
            for (c, v) in coefs[band.bins.clone()].iter_mut().zip(&noise) {
                *c += T::lit(g * v);
            }
        }
    }
    Ok(imdct(&frames)?)
}

/// Pre-echo: in every MDCT frame, Gaussian noise is injected per band at
/// `nmr_db` above the frame's masked threshold. Long blocks smear the noise
/// ahead of transients. Stereo input is processed as mid/side.
pub fn apply_pe<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    let ArtifactParams::Pe { nmr_db, block_length, seed } = *params else {
        return Err(ArtifactError::Parameter(format!("expected PE parameters, got {:?}", params.method())));
    };
    params.validate()?;
    let config = MdctConfig::new(block_length)?;
    if buffer.num_channels() == 2 {
        let (mid, side) = ms_encode(buffer)?;
        let mid = add_shaped_noise(&mid, nmr_db, &config, seed, 0)?;
        let side = add_shaped_noise(&side, nmr_db, &config, seed, 1)?;
        Ok(ms_decode(&mid, &side)?)
    } else {
        add_shaped_noise(buffer, nmr_db, &config, seed, 0)
    }
}
