//! Critical-band (Bark) partitioning of transform bins.

use std::ops::Range;

/// Lower edges of the 1-Bark critical bands in Hz; the last band extends to
/// Nyquist.
const BAND_EDGES_HZ: [f64; 25] = [
    0.0, 100.0, 200.0, 300.0, 400.0, 510.0, 630.0, 770.0, 920.0, 1080.0, 1270.0, 1480.0, 1720.0, 2000.0, 2320.0,
    2700.0, 3150.0, 3700.0, 4400.0, 5300.0, 6400.0, 7700.0, 9500.0, 12_000.0, 15_500.0,
];

/// Band edges up to and including `nyquist`.
pub fn critical_band_edges(nyquist: f64) -> Vec<f64> {
    let mut edges: Vec<f64> = BAND_EDGES_HZ.iter().copied().filter(|&e| e < nyquist).collect();
    edges.push(nyquist);
    edges
}

/// Traunmüller's approximation of the Bark scale.
pub fn hz_to_bark(f: f64) -> f64 {
    26.81 * f / (1960.0 + f) - 0.53
}

pub fn bark_to_hz(z: f64) -> f64 {
    1960.0 * (z + 0.53) / (26.28 - z)
}

/// One critical band as seen by a particular transform.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    /// Position in the critical-band table; neighbouring bands differ by one Bark.
    pub index: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub bins: Range<usize>,
}

/// Mapping of transform bins to critical bands, plus the energy a full-scale
/// sinusoid produces in one frame of that transform (the reference for the
/// absolute hearing threshold).
#[derive(Clone, Debug)]
pub struct BandLayout {
    pub bands: Vec<Band>,
    pub bin_freqs: Vec<f64>,
    pub full_scale_energy: f64,
}

impl BandLayout {
    fn from_bin_freqs(bin_freqs: Vec<f64>, nyquist: f64, full_scale_energy: f64) -> Self {
        let edges = critical_band_edges(nyquist);
        let mut bands = Vec::new();
        for (index, pair) in edges.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            let last = index + 2 == edges.len();
            let start = bin_freqs.iter().position(|&f| f >= lo).unwrap_or(bin_freqs.len());
            let end = bin_freqs
                .iter()
                .position(|&f| if last { f > hi } else { f >= hi })
                .unwrap_or(bin_freqs.len());
            if end > start {
                bands.push(Band { index, low_hz: lo, high_hz: hi, bins: start..end });
            }
        }
        Self { bands, bin_freqs, full_scale_energy }
    }

    /// Layout for the one-sided output of [`stft`](super::stft) with the
    /// unnormalised FFT: a full-scale sine carries about `N * sum(w^2) / 4`.
    pub fn for_stft(window_length: usize, window_energy: f64, sample_rate: u32) -> Self {
        let fs = sample_rate as f64;
        let freqs = (0..=window_length / 2).map(|k| k as f64 * fs / window_length as f64).collect();
        Self::from_bin_freqs(freqs, fs / 2.0, window_length as f64 * window_energy / 4.0)
    }

    /// Layout for the orthonormal MDCT of [`mdct`](super::mdct): a full-scale
    /// sine carries about `sum(w^2) / 2`.
    pub fn for_mdct(block_length: usize, sample_rate: u32) -> Self {
        let fs = sample_rate as f64;
        let freqs = (0..block_length / 2).map(|k| (k as f64 + 0.5) * fs / block_length as f64).collect();
        Self::from_bin_freqs(freqs, fs / 2.0, block_length as f64 / 4.0)
    }

    pub fn num_bins(&self) -> usize {
        self.bin_freqs.len()
    }

    /// Bin nearest to `freq`.
    pub fn nearest_bin(&self, freq: f64) -> usize {
        self.bin_freqs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - freq).abs().partial_cmp(&(b.1 - freq).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Sum of `power` over the bins of each band.
    pub fn band_energies<T: crate::scalar::Real>(&self, power: &[T]) -> Vec<T> {
        self.bands.iter().map(|b| power[b.bins.clone()].iter().copied().sum()).collect()
    }
}
