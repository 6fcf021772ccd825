//! Spectrum estimates used for analysis and verification.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

use super::Window;

/// Averaged one-sided periodogram: Hann window, 50% overlap, `nfft / 2 + 1`
/// bins. Returns all zeros for inputs shorter than one segment.
pub fn welch_psd<T: Real>(x: &[T], nfft: usize) -> Vec<f64> {
    let bins = nfft / 2 + 1;
    let mut psd = vec![0.0; bins];
    if x.len() < nfft {
        return psd;
    }
    let w: Vec<f64> = Window::Hann.coefficients(nfft);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let hop = nfft / 2;
    let mut count = 0usize;
    let mut start = 0;
    while start + nfft <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(x[start + i].as_f64() * w[i], 0.0);
        }
        fft.process(&mut buf);
        for (p, z) in psd.iter_mut().zip(&buf) {
            *p += z.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    psd.iter_mut().for_each(|p| *p /= count as f64);
    psd
}

/// Ratio of geometric to arithmetic mean of a power spectrum, in [0, 1].
pub fn spectral_flatness(power: &[f64]) -> f64 {
    if power.is_empty() {
        return 0.0;
    }
    let n = power.len() as f64;
    let arith = power.iter().sum::<f64>() / n;
    if arith <= 0.0 {
        return 0.0;
    }
    let log_mean = power.iter().map(|&p| p.max(1e-300).ln()).sum::<f64>() / n;
    (log_mean.exp() / arith).min(1.0)
}

/// RMS over bins of the dB difference between the Welch spectra of two
/// signals. Both spectra are floored 100 dB below the reference mean so that
/// zeroed regions stay finite.
pub fn log_spectral_distance<T: Real>(reference: &[T], test: &[T], nfft: usize) -> f64 {
    let r = welch_psd(reference, nfft);
    let t = welch_psd(test, nfft);
    let floor = 1e-10 * r.iter().sum::<f64>() / r.len() as f64;
    let sq: f64 = r
        .iter()
        .zip(&t)
        .map(|(&a, &b)| (10.0 * ((b + floor) / (a + floor)).log10()).powi(2))
        .sum();
    (sq / r.len() as f64).sqrt()
}
