//! Gated integrated loudness: K-weighting, 400 ms blocks at 75% overlap,
//! absolute gate at -70 LUFS and relative gate 10 LU below the ungated mean.

use crate::scalar::Real;

use super::{AudioBuffer, Result, SignalError};

const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;

/// Result of an integrated loudness measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loudness {
    Lufs(f64),
    /// Every block fell below the absolute gate.
    BelowGate,
}

impl Loudness {
    pub fn lufs(self) -> Option<f64> {
        match self {
            Loudness::Lufs(v) => Some(v),
            Loudness::BelowGate => None,
        }
    }
}

#[derive(Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    // Pre-filter design parameters as published with pyloudnorm, evaluated
    // at the actual sample rate.
    fn high_shelf(fs: f64) -> Self {
        let gain_db = 3.999_843_853_973_347;
        let q = 0.707_175_236_955_419_6;
        let fc = 1_681.974_450_955_533;
        let k = (std::f64::consts::PI * fc / fs).tan();
        let vh = 10f64.powf(gain_db / 20.0);
        let vb = vh.powf(0.499_666_774_154_541_6);
        let a0 = 1.0 + k / q + k * k;
        Self {
            b: [(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0, (vh - vb * k / q + k * k) / a0],
            a: [2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
        }
    }

    fn high_pass(fs: f64) -> Self {
        let q = 0.500_327_037_323_877_3;
        let fc = 38.135_470_876_139_82;
        let k = (std::f64::consts::PI * fc / fs).tan();
        let a0 = 1.0 + k / q + k * k;
        Self { b: [1.0, -2.0, 1.0], a: [2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0] }
    }

    fn run(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = self.b[0] * x0 + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }
}

fn energy_to_lufs(z: f64) -> f64 {
    -0.691 + 10.0 * z.log10()
}

/// Per-block channel-summed mean square of the K-weighted signal.
fn block_powers<T: Real>(buffer: &AudioBuffer<T>) -> Result<Vec<f64>> {
    let fs = buffer.sample_rate() as f64;
    let step = (fs / 10.0).round() as usize;
    let subblocks = buffer.len() / step;
    if subblocks < 4 {
        return Err(SignalError::Measurement(format!(
            "need at least 400 ms of audio, got {:.1} ms",
            buffer.duration_secs() * 1000.0
        )));
    }
    let (shelf, hp) = (Biquad::high_shelf(fs), Biquad::high_pass(fs));
    let mut sub = vec![0.0; subblocks];
    // Both channels of a stereo pair carry weight 1.0.
    for ch in buffer.channels() {
        let x: Vec<f64> = ch.iter().map(|v| v.as_f64()).collect();
        let y = hp.run(&shelf.run(&x));
        for (j, s) in sub.iter_mut().enumerate() {
            *s += y[j * step..(j + 1) * step].iter().map(|v| v * v).sum::<f64>();
        }
    }
    let norm = 1.0 / (4 * step) as f64;
    Ok(sub.windows(4).map(|w| w.iter().sum::<f64>() * norm).collect())
}

pub fn integrated_loudness<T: Real>(buffer: &AudioBuffer<T>) -> Result<Loudness> {
    let blocks = block_powers(buffer)?;
    let above_abs: Vec<f64> = blocks.into_iter().filter(|&z| z > 0.0 && energy_to_lufs(z) > ABSOLUTE_GATE_LUFS).collect();
    if above_abs.is_empty() {
        return Ok(Loudness::BelowGate);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let relative_gate = energy_to_lufs(mean(&above_abs)) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_abs.into_iter().filter(|&z| energy_to_lufs(z) > relative_gate).collect();
    if gated.is_empty() {
        return Ok(Loudness::BelowGate);
    }
    Ok(Loudness::Lufs(energy_to_lufs(mean(&gated))))
}

/// Broadband gain in dB that brings `buffer` to `target` LUFS.
pub fn loudness_gain_db<T: Real>(buffer: &AudioBuffer<T>, target: f64) -> Result<f64> {
    let mut gain_db = 0.0;
    // The absolute gate is not scale invariant, so re-measure after applying
    // the first estimate and refine.
    for _ in 0..4 {
        let scaled = buffer.scaled(T::lit(10f64.powf(gain_db / 20.0)));
        match integrated_loudness(&scaled)? {
            Loudness::Lufs(l) => {
                let delta = target - l;
                gain_db += delta;
                if delta.abs() < 1e-3 {
                    break;
                }
            }
            Loudness::BelowGate => return Err(SignalError::BelowGate),
        }
    }
    Ok(gain_db)
}

pub fn normalize_loudness<T: Real>(buffer: &AudioBuffer<T>, target: f64) -> Result<AudioBuffer<T>> {
    let gain_db = loudness_gain_db(buffer, target)?;
    Ok(buffer.scaled(T::lit(10f64.powf(gain_db / 20.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sine(freq: f64, amp: f64, secs: f64, fs: u32) -> Vec<f64> {
        (0..(secs * fs as f64) as usize)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / fs as f64).sin())
            .collect()
    }

    /// Magnitude response of the K-weighting cascade using the coefficient
    /// table published for 48 kHz, independent of the design formulas.
    fn k_weight_gain_48k(freq: f64) -> f64 {
        use rustfft::num_complex::Complex;
        let stages = [
            ([1.535_124_859_586_97, -2.691_696_189_406_38, 1.198_392_810_852_85], [-1.690_659_293_182_41, 0.732_480_774_215_85]),
            ([1.0, -2.0, 1.0], [-1.990_047_454_833_98, 0.990_072_250_366_21]),
        ];
        let w = 2.0 * std::f64::consts::PI * freq / 48_000.0;
        let z1 = Complex::from_polar(1.0, -w);
        let z2 = z1 * z1;
        stages
            .iter()
            .map(|(b, a)| ((b[0] + z1 * b[1] + z2 * b[2]) / (1.0 + z1 * a[0] + z2 * a[1])).norm_sqr())
            .product()
    }

    #[test]
    fn design_matches_published_48k_table() {
        let s = Biquad::high_shelf(48_000.0);
        let h = Biquad::high_pass(48_000.0);
        assert!((s.b[0] - 1.535_124_859_586_97).abs() < 1e-8);
        assert!((s.a[0] + 1.690_659_293_182_41).abs() < 1e-8);
        assert!((h.a[0] + 1.990_047_454_833_98).abs() < 1e-8);
        assert!((h.a[1] - 0.990_072_250_366_21).abs() < 1e-8);
    }

    #[test]
    fn full_scale_997hz_stereo() {
        // Oracle: -0.691 + 10 log10(sum of channel mean squares * |H(997)|^2).
        let x = sine(997.0, 1.0, 10.0, 48_000);
        let buf = AudioBuffer::stereo(48_000, x.clone(), x).unwrap();
        let expected = -0.691 + 10.0 * (2.0 * 0.5 * k_weight_gain_48k(997.0)).log10();
        let measured = integrated_loudness(&buf).unwrap().lufs().unwrap();
        assert!((measured - expected).abs() < 0.1, "{measured} vs {expected}");
        // One channel at full scale reads -3.01 LKFS per the conformance signal.
        let mono = AudioBuffer::mono(48_000, sine(997.0, 1.0, 10.0, 48_000)).unwrap();
        assert!((integrated_loudness(&mono).unwrap().lufs().unwrap() + 3.01).abs() < 0.05);
    }

    #[test]
    fn twenty_db_down() {
        let a = AudioBuffer::stereo(48_000, sine(997.0, 1.0, 10.0, 48_000), sine(997.0, 1.0, 10.0, 48_000)).unwrap();
        let b = a.scaled(0.1);
        let la = integrated_loudness(&a).unwrap().lufs().unwrap();
        let lb = integrated_loudness(&b).unwrap().lufs().unwrap();
        assert!((la - 20.0 - lb).abs() < 0.1);
    }

    #[test]
    fn silence_is_below_gate() {
        let buf = AudioBuffer::<f64>::silence(48_000, 2, 48_000).unwrap();
        assert_eq!(integrated_loudness(&buf).unwrap(), Loudness::BelowGate);
        assert!(matches!(normalize_loudness(&buf, -23.0), Err(SignalError::BelowGate)));
    }

    #[test]
    fn too_short_is_an_error() {
        let buf = AudioBuffer::mono(48_000, vec![0.1; 19_000]).unwrap();
        assert!(matches!(integrated_loudness(&buf), Err(SignalError::Measurement(_))));
    }

    #[test]
    fn normalisation_gain_and_closure() {
        let x = sine(997.0, 1.0, 10.0, 48_000);
        let buf = AudioBuffer::stereo(48_000, x.clone(), x).unwrap();
        let measured = integrated_loudness(&buf).unwrap().lufs().unwrap();
        let gain = loudness_gain_db(&buf, -23.0).unwrap();
        assert!((gain - (-23.0 - measured)).abs() < 0.05);
        let out = normalize_loudness(&buf, -23.0).unwrap();
        let l = integrated_loudness(&out).unwrap().lufs().unwrap();
        assert!((-23.1..=-22.9).contains(&l));
        assert!(loudness_gain_db(&out, -23.0).unwrap().abs() < 0.1);
    }

    #[test]
    fn gain_shifts_loudness_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..48_000 * 3).map(|_| { let v: f64 = StandardNormal.sample(&mut rng); 0.1 * v }).collect();
        let buf = AudioBuffer::mono(44_100, x).unwrap();
        let base = integrated_loudness(&buf).unwrap().lufs().unwrap();
        for g in [0.05, 0.5, 2.0, 5.0] {
            let l = integrated_loudness(&buf.scaled(g)).unwrap().lufs().unwrap();
            assert!((l - base - 20.0 * f64::log10(g)).abs() < 0.1);
        }
    }
}
