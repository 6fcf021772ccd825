//! Simultaneous-masking model shared by the pre-echo generator and the NMR
//! metric.
//!
//! Band energies are spread across critical bands with fixed slopes (27 dB
//! per Bark towards lower bands, 10 dB per Bark towards higher bands), offset
//! by -9 dB, and floored at the absolute threshold of hearing.

use crate::scalar::Real;
use crate::signal::BandLayout;

pub const LOWER_SLOPE_DB_PER_BARK: f64 = 27.0;
pub const UPPER_SLOPE_DB_PER_BARK: f64 = 10.0;
pub const MASKING_OFFSET_DB: f64 = -9.0;
/// Sound pressure level a full-scale sinusoid is assumed to play back at.
pub const FULL_SCALE_SPL_DB: f64 = 96.0;

/// Threshold in quiet (Terhardt), dB SPL. Evaluated no lower than 20 Hz.
pub fn absolute_threshold_db_spl(freq_hz: f64) -> f64 {
    let f = freq_hz.max(20.0) / 1000.0;
    3.64 * f.powf(-0.8) - 6.5 * (-0.6 * (f - 3.3).powi(2)).exp() + 1e-3 * f.powi(4)
}

/// Masked threshold of one frame, per band of the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskingThreshold<T = f64> {
    pub thresholds: Vec<T>,
    /// Absolute-threshold floor of each band, in the same energy units.
    pub floor: Vec<T>,
}

/// Precomputed spreading matrix and hearing-threshold floor for one layout.
#[derive(Clone, Debug)]
pub struct MaskingModel {
    spreading: Vec<Vec<f64>>,
    floor: Vec<f64>,
}

impl MaskingModel {
    pub fn new(layout: &BandLayout) -> Self {
        let offset = 10f64.powf(MASKING_OFFSET_DB / 10.0);
        let spreading = layout
            .bands
            .iter()
            .map(|maskee| {
                layout
                    .bands
                    .iter()
                    .map(|masker| {
                        let dz = maskee.index as f64 - masker.index as f64;
                        let drop_db = if dz < 0.0 { LOWER_SLOPE_DB_PER_BARK * -dz } else { UPPER_SLOPE_DB_PER_BARK * dz };
                        offset * 10f64.powf(-drop_db / 10.0)
                    })
                    .collect()
            })
            .collect();
        let floor = layout
            .bands
            .iter()
            .map(|b| {
                let quietest = layout.bin_freqs[b.bins.clone()]
                    .iter()
                    .map(|&f| absolute_threshold_db_spl(f))
                    .fold(f64::INFINITY, f64::min);
                layout.full_scale_energy * 10f64.powf((quietest - FULL_SCALE_SPL_DB) / 10.0)
            })
            .collect();
        Self { spreading, floor }
    }

    pub fn num_bands(&self) -> usize {
        self.floor.len()
    }

    /// Threshold from per-band energies.
    pub fn threshold_from_bands<T: Real>(&self, energies: &[T]) -> MaskingThreshold<T> {
        let thresholds = self
            .spreading
            .iter()
            .zip(&self.floor)
            .map(|(row, &floor)| {
                let spread: T = row.iter().zip(energies).map(|(&s, &e)| T::lit(s) * e).sum();
                spread.max(T::lit(floor))
            })
            .collect();
        MaskingThreshold { thresholds, floor: self.floor.iter().map(|&f| T::lit(f)).collect() }
    }

    /// Threshold from the per-bin power of one frame.
    pub fn threshold<T: Real>(&self, power: &[T], layout: &BandLayout) -> MaskingThreshold<T> {
        self.threshold_from_bands(&layout.band_energies(power))
    }
}

/// One-shot form of [`MaskingModel::threshold`].
pub fn masking_threshold<T: Real>(power: &[T], layout: &BandLayout) -> MaskingThreshold<T> {
    MaskingModel::new(layout).threshold(power, layout)
}
