use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

use super::{AudioBuffer, Result, SignalError};

/// Block lengths (window lengths, in samples) supported for the lapped transform.
pub const MDCT_BLOCK_LENGTHS: [usize; 3] = [1024, 2048, 4096];

/// Sine-windowed MDCT with 50% overlap. `block_length` is the window length
/// N; each frame carries N/2 coefficients and frames advance by N/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdctConfig {
    block_length: usize,
}

impl MdctConfig {
    pub fn new(block_length: usize) -> Result<Self> {
        if !MDCT_BLOCK_LENGTHS.contains(&block_length) {
            return Err(SignalError::Config(format!(
                "block length {block_length} not in {MDCT_BLOCK_LENGTHS:?}"
            )));
        }
        Ok(Self { block_length })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn num_coefficients(&self) -> usize {
        self.block_length / 2
    }

    pub fn hop(&self) -> usize {
        self.block_length / 2
    }
}

/// MDCT coefficients, `channels[c][frame][k]`.
#[derive(Clone, Debug)]
pub struct MdctFrames<T = f64> {
    pub config: MdctConfig,
    pub sample_rate: u32,
    pub len: usize,
    pub channels: Vec<Vec<Vec<T>>>,
}

impl<T: Real> MdctFrames<T> {
    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len())
    }

    /// Centre frequency of coefficient `k` in Hz.
    pub fn coefficient_hz(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.sample_rate as f64 / self.config.block_length as f64
    }

    /// Signal index of the first sample of frame `m`.
    pub fn frame_start(&self, m: usize) -> isize {
        (m * self.config.hop()) as isize - self.config.hop() as isize
    }
}

/// Orthonormal MDCT kernel evaluated through an N-point complex FFT:
/// `X[k] = sqrt(2/M) sum_n w[n] x[n] cos(2 pi / N (n + n0)(k + 1/2))`, with
/// M = N/2 and n0 = (M + 1)/2.
struct Kernel<T: Real> {
    n: usize,
    window: Vec<T>,
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
    inv_pre: Vec<Complex<T>>,
    inv_post: Vec<Complex<T>>,
    scale: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Kernel<T> {
    fn new(n: usize) -> Self {
        let m = n / 2;
        let n0 = (m as f64 + 1.0) / 2.0;
        let nf = n as f64;
        let pi = std::f64::consts::PI;
        let cis = |phi: f64| Complex::new(T::lit(phi.cos()), T::lit(phi.sin()));
        let mut planner = FftPlanner::<T>::new();
        Self {
            n,
            window: super::Window::Sine.coefficients(n),
            pre: (0..n).map(|i| cis(-pi * i as f64 / nf)).collect(),
            post: (0..m).map(|k| cis(-2.0 * pi * n0 * (k as f64 + 0.5) / nf)).collect(),
            inv_pre: (0..m).map(|k| cis(2.0 * pi * n0 * k as f64 / nf)).collect(),
            inv_post: (0..n).map(|i| cis(pi * (i as f64 + n0) / nf)).collect(),
            scale: T::lit((2.0 / m as f64).sqrt()),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn forward(&self, block: &[T], scratch: &mut [Complex<T>], out: &mut [T]) {
        for i in 0..self.n {
            scratch[i] = self.pre[i] * (block[i] * self.window[i]);
        }
        self.forward.process(scratch);
        for (k, o) in out.iter_mut().enumerate() {
            *o = (self.post[k] * scratch[k]).re * self.scale;
        }
    }

    fn inverse(&self, coefs: &[T], scratch: &mut [Complex<T>], out: &mut [T]) {
        let m = self.n / 2;
        for k in 0..m {
            scratch[k] = self.inv_pre[k] * coefs[k];
        }
        for s in scratch[m..].iter_mut() {
            *s = Complex::new(T::zero(), T::zero());
        }
        self.inverse.process(scratch);
        for i in 0..self.n {
            out[i] = (self.inv_post[i] * scratch[i]).re * self.scale * self.window[i];
        }
    }
}

pub fn mdct<T: Real>(buffer: &AudioBuffer<T>, config: &MdctConfig) -> MdctFrames<T> {
    let n = config.block_length;
    let hop = config.hop();
    let kernel = Kernel::<T>::new(n);
    let frames = if buffer.is_empty() { 0 } else { (buffer.len() - 1 + hop) / hop + 1 };
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); n];
    let mut block = vec![T::zero(); n];

    let channels = buffer
        .channels()
        .iter()
        .map(|x| {
            (0..frames)
                .map(|m| {
                    let start = (m * hop) as isize - hop as isize;
                    for (i, b) in block.iter_mut().enumerate() {
                        let idx = start + i as isize;
                        *b = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] } else { T::zero() };
                    }
                    let mut out = vec![T::zero(); hop];
                    kernel.forward(&block, &mut scratch, &mut out);
                    out
                })
                .collect()
        })
        .collect();

    MdctFrames { config: *config, sample_rate: buffer.sample_rate(), len: buffer.len(), channels }
}

/// Inverse transform with windowed overlap-add; time-domain aliasing cancels
/// between neighbouring frames.
pub fn imdct<T: Real>(frames: &MdctFrames<T>) -> Result<AudioBuffer<T>> {
    let n = frames.config.block_length;
    let hop = frames.config.hop();
    let kernel = Kernel::<T>::new(n);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); n];
    let mut block = vec![T::zero(); n];
    let mut out = Vec::with_capacity(frames.channels.len());

    for ch in &frames.channels {
        let total = (ch.len().saturating_sub(1) * hop + n).max(hop + frames.len);
        let mut acc = vec![T::zero(); total];
        for (m, coefs) in ch.iter().enumerate() {
            if coefs.len() != hop {
                return Err(SignalError::Config(format!("frame {m} has {} coefficients, expected {hop}", coefs.len())));
            }
            kernel.inverse(coefs, &mut scratch, &mut block);
            for (a, b) in acc[m * hop..m * hop + n].iter_mut().zip(&block) {
                *a += *b;
            }
        }
        out.push(acc[hop..hop + frames.len].to_vec());
    }
    AudioBuffer::new(frames.sample_rate, out)
}
