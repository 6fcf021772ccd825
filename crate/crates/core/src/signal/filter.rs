use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

use super::{AudioBuffer, Result, SignalError};

/// Stopband attenuation the Kaiser design aims for; leaves margin over the
/// required 60 dB.
const DESIGN_ATTENUATION_DB: f64 = 70.0;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Linear-phase low-pass taps (odd length, unit DC gain). The transition band
/// runs from 0.95·cutoff to 1.25·cutoff (or Nyquist, if lower).
pub fn design_lowpass(cutoff: f64, sample_rate: u32) -> Result<Vec<f64>> {
    let fs = sample_rate as f64;
    let nyquist = fs / 2.0;
    if !(cutoff > 0.0 && cutoff < nyquist) {
        return Err(SignalError::Parameter(format!("cutoff {cutoff} Hz outside (0, {nyquist})")));
    }
    let pass = 0.95 * cutoff;
    let stop = (1.25 * cutoff).min(nyquist);
    let transition = 2.0 * std::f64::consts::PI * (stop - pass) / fs;
    let a = DESIGN_ATTENUATION_DB;
    let beta = 0.1102 * (a - 8.7);
    let mut taps = ((a - 7.95) / (2.285 * transition)).ceil() as usize + 1;
    if taps.is_multiple_of(2) {
        taps += 1;
    }
    let centre = (taps - 1) as f64 / 2.0;
    let fc = (pass + stop) / 2.0 / fs;
    let i0_beta = bessel_i0(beta);
    let mut h: Vec<f64> = (0..taps)
        .map(|n| {
            let t = n as f64 - centre;
            let sinc = if t == 0.0 { 2.0 * fc } else { (2.0 * std::f64::consts::PI * fc * t).sin() / (std::f64::consts::PI * t) };
            let r = t / centre;
            sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    Ok(h)
}

/// Convolve and drop the filter's group delay so the output lines up
/// sample-for-sample with the input.
fn convolve_aligned<T: Real>(x: &[T], h: &[f64]) -> Vec<T> {
    let delay = (h.len() - 1) / 2;
    let size = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let (fwd, inv) = (planner.plan_fft_forward(size), planner.plan_fft_inverse(size));
    let zero = Complex::new(T::zero(), T::zero());

    let mut xs = vec![zero; size];
    for (d, &s) in xs.iter_mut().zip(x) {
        d.re = s;
    }
    let mut hs = vec![zero; size];
    for (d, &s) in hs.iter_mut().zip(h) {
        d.re = T::lit(s);
    }
    fwd.process(&mut xs);
    fwd.process(&mut hs);
    for (a, b) in xs.iter_mut().zip(&hs) {
        *a *= *b;
    }
    inv.process(&mut xs);
    let scale = T::one() / T::lit(size as f64);
    xs[delay..delay + x.len()].iter().map(|z| z.re * scale).collect()
}

/// Delay-compensated linear-phase FIR low-pass.
pub fn lowpass<T: Real>(buffer: &AudioBuffer<T>, cutoff: f64) -> Result<AudioBuffer<T>> {
    let h = design_lowpass(cutoff, buffer.sample_rate())?;
    if buffer.is_empty() {
        return Ok(buffer.clone());
    }
    buffer.map_channels(|_, x| convolve_aligned(x, &h))
}
