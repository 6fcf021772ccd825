use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

use super::{AudioBuffer, Result, SignalError};

/// Analysis window. The same window is used for synthesis, so the pair is
/// valid when the squared window overlap-adds to a constant at the hop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// `sin(pi (n + 1/2) / N)`; power-complementary at 50% overlap.
    Sine,
    /// Periodic Hann; its square overlap-adds to a constant at 75% overlap.
    Hann,
}

impl Window {
    pub fn coefficients<T: Real>(self, len: usize) -> Vec<T> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let i = i as f64;
                let w = match self {
                    Window::Sine => (std::f64::consts::PI * (i + 0.5) / n).sin(),
                    Window::Hann => 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i / n).cos(),
                };
                T::lit(w)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub window: Window,
}

impl StftConfig {
    pub fn new(window_length: usize, hop: usize, window: Window) -> Result<Self> {
        let cfg = Self { window_length, hop, window };
        cfg.overlap_gain()?;
        Ok(cfg)
    }

    /// 50%-overlap sine window of the given length.
    pub fn sine(window_length: usize) -> Result<Self> {
        Self::new(window_length, window_length / 2, Window::Sine)
    }

    pub fn num_bins(&self) -> usize {
        self.window_length / 2 + 1
    }

    /// Sum of squared window coefficients.
    pub fn window_energy(&self) -> f64 {
        self.window.coefficients::<f64>(self.window_length).iter().map(|w| w * w).sum()
    }

    /// Critical-band layout of this transform's bins.
    pub fn band_layout(&self, sample_rate: u32) -> super::BandLayout {
        super::BandLayout::for_stft(self.window_length, self.window_energy(), sample_rate)
    }

    /// Constant value of the overlap-added squared window, or a config error
    /// if no such constant exists.
    pub fn overlap_gain(&self) -> Result<f64> {
        let (n, hop) = (self.window_length, self.hop);
        if n < 2 || n % 2 != 0 {
            return Err(SignalError::Config(format!("window length {n} must be even and >= 2")));
        }
        if hop == 0 || hop > n {
            return Err(SignalError::Config(format!("hop {hop} must be in 1..={n}")));
        }
        let w: Vec<f64> = self.window.coefficients(n);
        let mut sums = vec![0.0; hop];
        for (i, wi) in w.iter().enumerate() {
            sums[i % hop] += wi * wi;
        }
        let c = sums[0];
        if c <= 0.0 || sums.iter().any(|s| (s - c).abs() > 1e-9 * c) {
            return Err(SignalError::Config(format!(
                "{:?} window of length {n} does not overlap-add to a constant at hop {hop}",
                self.window
            )));
        }
        Ok(c)
    }

    fn pad_front(&self) -> usize {
        self.window_length - self.hop
    }
}

/// One-sided complex spectrogram, `channels[c][frame][bin]`.
#[derive(Clone, Debug)]
pub struct Spectrogram<T = f64> {
    pub config: StftConfig,
    pub sample_rate: u32,
    /// Length of the analysed signal in samples.
    pub len: usize,
    pub channels: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> Spectrogram<T> {
    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, |c| c.len())
    }

    pub fn num_bins(&self) -> usize {
        self.config.num_bins()
    }

    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.config.window_length as f64
    }

    /// Signal index of the first sample of frame `m` (negative in the padded lead-in).
    pub fn frame_start(&self, m: usize) -> isize {
        (m * self.config.hop) as isize - self.config.pad_front() as isize
    }

    pub fn frame_power(&self, ch: usize, m: usize) -> Vec<T> {
        self.channels[ch][m].iter().map(|z| z.norm_sqr()).collect()
    }
}

fn num_frames(len: usize, cfg: &StftConfig) -> usize {
    if len == 0 {
        0
    } else {
        (len - 1 + cfg.pad_front()) / cfg.hop + 1
    }
}

/// Short-time Fourier transform. Leading and trailing zero padding makes
/// every input sample fully covered, so [`istft`] reconstructs all of them.
pub fn stft<T: Real>(buffer: &AudioBuffer<T>, config: &StftConfig) -> Result<Spectrogram<T>> {
    config.overlap_gain()?;
    let n = config.window_length;
    let window: Vec<T> = config.window.coefficients(n);
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let frames = num_frames(buffer.len(), config);
    let pad = config.pad_front();

    let channels = buffer
        .channels()
        .iter()
        .map(|x| {
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); n];
            (0..frames)
                .map(|m| {
                    let start = (m * config.hop) as isize - pad as isize;
                    for (i, s) in scratch.iter_mut().enumerate() {
                        let idx = start + i as isize;
                        let v = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] } else { T::zero() };
                        *s = Complex::new(v * window[i], T::zero());
                    }
                    fft.process(&mut scratch);
                    scratch[..config.num_bins()].to_vec()
                })
                .collect()
        })
        .collect();

    Ok(Spectrogram { config: *config, sample_rate: buffer.sample_rate(), len: buffer.len(), channels })
}

/// Weighted overlap-add inverse of [`stft`].
pub fn istft<T: Real>(spec: &Spectrogram<T>) -> Result<AudioBuffer<T>> {
    let config = &spec.config;
    let gain = T::lit(config.overlap_gain()?);
    let n = config.window_length;
    let bins = config.num_bins();
    let window: Vec<T> = config.window.coefficients(n);
    let ifft = FftPlanner::<T>::new().plan_fft_inverse(n);
    let pad = config.pad_front();
    let scale = T::one() / (T::lit(n as f64) * gain);

    let mut out = Vec::with_capacity(spec.channels.len());
    for frames in &spec.channels {
        let total = frames.len().saturating_sub(1) * config.hop + n;
        let mut acc = vec![T::zero(); total.max(pad + spec.len)];
        let mut full = vec![Complex::new(T::zero(), T::zero()); n];
        for (m, frame) in frames.iter().enumerate() {
            if frame.len() != bins {
                return Err(SignalError::Config(format!("frame {m} has {} bins, expected {bins}", frame.len())));
            }
            full[..bins].copy_from_slice(frame);
            full[0].im = T::zero();
            full[n / 2].im = T::zero();
            for k in 1..n / 2 {
                full[n - k] = frame[k].conj();
            }
            ifft.process(&mut full);
            let start = m * config.hop;
            for i in 0..n {
                acc[start + i] += full[i].re * window[i] * scale;
            }
        }
        out.push(acc[pad..pad + spec.len].to_vec());
    }
    AudioBuffer::new(spec.sample_rate, out)
}
