//! Bandwidth-extension style substitutions above a crossover frequency:
//! noise-like content replaced by tones (TM) and tonal content replaced by
//! noise (UN). Both keep the per-frame Bark-band energies.

use std::ops::Range;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

use crate::scalar::Real;
use crate::signal::{bark_to_hz, hz_to_bark, istft, stft, AudioBuffer, BandLayout, Spectrogram, StftConfig};

use super::{channel_rng, ArtifactError, ArtifactParams, Result};

/// Analysis window length used by the substitution generators.
pub const SUBSTITUTION_WINDOW: usize = 2048;

/// Bands narrower than this are merged into their upper neighbour.
const MIN_BAND_BINS: usize = 3;

struct Crossover {
    /// Per-bin amplitude kept from the original.
    keep: Vec<f64>,
    /// Per-bin share of the original energy handed to the substitute.
    substitute: Vec<f64>,
    bands: Vec<Range<usize>>,
    /// Substitute tone frequency per band.
    centres_hz: Vec<f64>,
}

impl Crossover {
    /// Hard split at the bin nearest `crossover_hz` followed by a one-Bark
    /// power-complementary raised-cosine fade from original to substitute.
    fn new(layout: &BandLayout, crossover_hz: f64) -> Self {
        let start = layout.nearest_bin(crossover_hz);
        let z0 = hz_to_bark(crossover_hz);
        let n = layout.num_bins();
        let mut keep = vec![1.0; n];
        let mut substitute = vec![0.0; n];
        for k in start..n {
            let u = (hz_to_bark(layout.bin_freqs[k]) - z0).clamp(0.0, 1.0);
            let phase = std::f64::consts::FRAC_PI_2 * u;
            keep[k] = phase.cos();
            substitute[k] = phase.sin().powi(2);
        }

        let mut bands: Vec<Range<usize>> = Vec::new();
        for b in &layout.bands {
            let lo = b.bins.start.max(start);
            if lo >= b.bins.end {
                continue;
            }
            match bands.last_mut() {
                Some(prev) if prev.len() < MIN_BAND_BINS => prev.end = b.bins.end,
                _ => bands.push(lo..b.bins.end),
            }
        }
        if bands.len() > 1 && bands.last().is_some_and(|r| r.len() < MIN_BAND_BINS) {
            let tail = bands.pop().unwrap();
            bands.last_mut().unwrap().end = tail.end;
        }
        let centres_hz = bands
            .iter()
            .map(|r| {
                let lo = layout.bin_freqs[r.start];
                let hi = layout.bin_freqs[r.end - 1];
                bark_to_hz(0.5 * (hz_to_bark(lo) + hz_to_bark(hi)))
            })
            .collect();
        Self { keep, substitute, bands, centres_hz }
    }

    fn substitute_energy<T: Real>(&self, frame: &[Complex<T>], band: &Range<usize>) -> f64 {
        band.clone().map(|k| self.substitute[k] * frame[k].norm_sqr().as_f64()).sum()
    }
}

fn check_crossover<T: Real>(buffer: &AudioBuffer<T>, crossover_hz: f64) -> Result<()> {
    let nyquist = buffer.sample_rate() as f64 / 2.0;
    if !(crossover_hz > 0.0 && crossover_hz < nyquist) {
        return Err(ArtifactError::Parameter(format!("crossover {crossover_hz} Hz outside (0, {nyquist})")));
    }
    Ok(())
}

fn analyse<T: Real>(buffer: &AudioBuffer<T>, crossover_hz: f64) -> Result<(Spectrogram<T>, Crossover, StftConfig)> {
    let config = StftConfig::sine(SUBSTITUTION_WINDOW)?;
    let layout = config.band_layout(buffer.sample_rate());
    let spec = stft(buffer, &config)?;
    Ok((spec, Crossover::new(&layout, crossover_hz), config))
}

/// Tonality mismatch: every band above the crossover becomes one
/// phase-continuous sinusoid at the band centre carrying the band's energy.
pub fn apply_tm<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    let ArtifactParams::Tm { crossover_hz } = *params else {
        return Err(ArtifactError::Parameter(format!("expected TM parameters, got {:?}", params.method())));
    };
    params.validate()?;
    check_crossover(buffer, crossover_hz)?;
    let (mut spec, xover, config) = analyse(buffer, crossover_hz)?;
    let n = config.window_length;
    let fs = buffer.sample_rate() as f64;
    let window: Vec<f64> = config.window.coefficients(n);

    // Spectrum of a unit-amplitude windowed cosine starting at phase zero,
    // restricted to the band: T_k = 1/2 sum_n w[n] exp(i (omega - 2 pi k / N) n).
    let templates: Vec<(f64, Vec<Complex<f64>>, f64)> = xover
        .bands
        .iter()
        .zip(&xover.centres_hz)
        .map(|(band, &f)| {
            let omega = 2.0 * std::f64::consts::PI * f / fs;
            let t: Vec<Complex<f64>> = band
                .clone()
                .map(|k| {
                    let d = omega - 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    window
                        .iter()
                        .enumerate()
                        .map(|(i, &w)| Complex::from_polar(0.5 * w, d * i as f64))
                        .sum()
                })
                .collect();
            let energy = t.iter().map(|z| z.norm_sqr()).sum();
            (omega, t, energy)
        })
        .collect();

    let starts: Vec<isize> = (0..spec.num_frames()).map(|m| spec.frame_start(m)).collect();
    for frames in spec.channels.iter_mut() {
        for (m, frame) in frames.iter_mut().enumerate() {
            let energies: Vec<f64> = xover.bands.iter().map(|b| xover.substitute_energy(frame, b)).collect();
            for (k, z) in frame.iter_mut().enumerate() {
                *z *= T::lit(xover.keep[k]);
            }
            for ((band, (omega, template, t_energy)), e) in xover.bands.iter().zip(&templates).zip(energies) {
                if e <= 0.0 || *t_energy <= 0.0 {
                    continue;
                }
                let amp = (e / t_energy).sqrt();
                let rot = Complex::from_polar(amp, omega * starts[m] as f64);
                for (k, t) in band.clone().zip(template) {
                    let v = rot * t;
                    frame[k] += Complex::new(T::lit(v.re), T::lit(v.im));
                }
            }
        }
    }
    Ok(istft(&spec)?)
}

/// Unmasked noise: every band above the crossover is replaced by seeded
/// Gaussian noise scaled per frame to the band's energy.
pub fn apply_un<T: Real>(buffer: &AudioBuffer<T>, params: &ArtifactParams) -> Result<AudioBuffer<T>> {
    let ArtifactParams::Un { crossover_hz, seed } = *params else {
        return Err(ArtifactError::Parameter(format!("expected UN parameters, got {:?}", params.method())));
    };
    params.validate()?;
    check_crossover(buffer, crossover_hz)?;
    let (mut spec, xover, config) = analyse(buffer, crossover_hz)?;

    // Noise is drawn in the time domain and analysed with the same STFT so
    // that its frames overlap-add consistently.
    let noise_channels: Vec<Vec<T>> = (0..buffer.num_channels())
        .map(|c| {
            let mut rng = channel_rng(seed, c as u64);
            (0..buffer.len())
                .map(|_| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    T::lit(v)
                })
                .collect()
        })
        .collect();
    let noise = stft(&AudioBuffer::new(buffer.sample_rate(), noise_channels)?, &config)?;

    for (frames, noise_frames) in spec.channels.iter_mut().zip(&noise.channels) {
        for (frame, nframe) in frames.iter_mut().zip(noise_frames) {
            let energies: Vec<f64> = xover.bands.iter().map(|b| xover.substitute_energy(frame, b)).collect();
            for (k, z) in frame.iter_mut().enumerate() {
                *z *= T::lit(xover.keep[k]);
            }
            for (band, e) in xover.bands.iter().zip(energies) {
                let shaped: f64 = band.clone().map(|k| xover.substitute[k] * nframe[k].norm_sqr().as_f64()).sum();
                if e <= 0.0 || shaped <= 0.0 {
                    continue;
                }
                let g = (e / shaped).sqrt();
                for k in band.clone() {
                    frame[k] += nframe[k] * T::lit(g * xover.substitute[k].sqrt());
                }
            }
        }
    }
    Ok(istft(&spec)?)
}
