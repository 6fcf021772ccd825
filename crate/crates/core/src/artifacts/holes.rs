use rand::Rng;

use crate::scalar::Real;
use crate::signal::{istft, ms_decode, ms_encode, stft, AudioBuffer, StftConfig};

use super::{channel_rng, substitution::SUBSTITUTION_WINDOW, ArtifactError, ArtifactParams, Result};

/// Tile counts of one spectral-holes run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HoleStats {
    pub zeroed: usize,
    pub total: usize,
}

impl HoleStats {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.zeroed as f64 / self.total as f64
        }
    }
}

fn punch<T: Real>(channel: &AudioBuffer<T>, hole_prob: f64, seed: u64, stream: u64, stats: &mut HoleStats) -> Result<AudioBuffer<T>> {
    let config = StftConfig::sine(SUBSTITUTION_WINDOW)?;
    let layout = config.band_layout(channel.sample_rate());
    let mut spec = stft(channel, &config)?;
    let mut rng = channel_rng(seed, stream);
    for frame in spec.channels[0].iter_mut() {
        for band in &layout.bands {
            stats.total += 1;
            if rng.random_bool(hole_prob) {
                stats.zeroed += 1;
                for z in &mut frame[band.bins.clone()] {
                    z.re = T::zero();
                    z.im = T::zero();
                }
            }
        }
    }
    Ok(istft(&spec)?)
}

/// Spectral holes: each (frame, Bark band) tile is independently zeroed with
/// probability `hole_prob`. Stereo input is processed as mid/side so that
/// holes sit in the phantom centre.
pub fn apply_sh_with_stats<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<(AudioBuffer<T>, HoleStats)> {
    let ArtifactParams::Sh { hole_prob, seed } = *params else {
        return Err(ArtifactError::Parameter(format!("expected SH parameters, got {:?}", params.method())));
    };
    params.validate()?;
    let mut stats = HoleStats::default();
    let out = if buffer.num_channels() == 2 {
        let (mid, side) = ms_encode(buffer)?;
        let mid = punch(&mid, hole_prob, seed, 0, &mut stats)?;
        let side = punch(&side, hole_prob, seed, 1, &mut stats)?;
        ms_decode(&mid, &side)?
    } else {
        punch(buffer, hole_prob, seed, 0, &mut stats)?
    };
    Ok((out, stats))
}

pub fn apply_sh<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    apply_sh_with_stats(buffer, params).map(|(b, _)| b)
}
