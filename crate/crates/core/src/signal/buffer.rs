use crate::scalar::{Real, Sample};

use super::{Result, SignalError};

/// Multichannel audio at a fixed sample rate. Every channel has the same
/// length and every sample is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer<T = f64> {
    sample_rate: u32,
    channels: Vec<Vec<T>>,
}

impl<T: Sample> AudioBuffer<T> {
    pub fn new(sample_rate: u32, channels: Vec<Vec<T>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(SignalError::InvalidBuffer("sample rate must be positive".into()));
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(SignalError::InvalidBuffer(format!(
                "expected 1 or 2 channels, got {}",
                channels.len()
            )));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(SignalError::InvalidBuffer("channels differ in length".into()));
        }
        if let Some(pos) = channels
            .iter()
            .flat_map(|c| c.iter().enumerate())
            .find(|(_, s)| !s.is_finite_sample())
            .map(|(i, _)| i)
        {
            return Err(SignalError::InvalidBuffer(format!("non-finite sample at index {pos}")));
        }
        Ok(Self { sample_rate, channels })
    }

    pub fn mono(sample_rate: u32, samples: Vec<T>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn stereo(sample_rate: u32, left: Vec<T>, right: Vec<T>) -> Result<Self> {
        Self::new(sample_rate, vec![left, right])
    }

    pub fn silence(sample_rate: u32, num_channels: usize, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![vec![T::zero(); len]; num_channels])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of sample frames (samples per channel).
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[T] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<T>> {
        self.channels
    }

    /// Apply `f` to every channel, keeping the sample rate. The result is
    /// validated like any freshly constructed buffer.
    pub fn map_channels<U: Sample>(&self, mut f: impl FnMut(usize, &[T]) -> Vec<U>) -> Result<AudioBuffer<U>> {
        let channels = self.channels.iter().enumerate().map(|(i, c)| f(i, c)).collect();
        AudioBuffer::new(self.sample_rate, channels)
    }
}

impl<T: Real> AudioBuffer<T> {
    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn scaled(&self, gain: T) -> Self {
        Self {
            sample_rate: self.sample_rate,
            channels: self.channels.iter().map(|c| c.iter().map(|&x| x * gain).collect()).collect(),
        }
    }

    /// Sum of squares over all channels.
    pub fn energy(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .map(|&x| {
                let v = x.as_f64();
                v * v
            })
            .sum()
    }

    pub fn peak(&self) -> T {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn convert<U: Real>(&self) -> AudioBuffer<U> {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|&x| U::lit(x.as_f64())).collect())
                .collect(),
        }
    }
}
