use crate::scalar::Real;
use crate::signal::{downmix_mono, AudioBuffer};

use super::{check_pair, MetricError, Result};

/// Reported when the residual vanishes; the negated value when the estimate
/// has no reference component.
pub const SI_SDR_CEILING_DB: f64 = 120.0;

/// Scale-invariant signal-to-distortion ratio in dB. Stereo input is
/// downmixed first.
pub fn si_sdr<T: Real>(reference: &AudioBuffer<T>, estimate: &AudioBuffer<T>) -> Result<f64> {
    check_pair(reference, estimate)?;
    let r = downmix_mono(reference);
    let e = downmix_mono(estimate);
    let (r, e) = (r.channel(0), e.channel(0));
    let rr: f64 = r.iter().map(|v| v.as_f64().powi(2)).sum();
    if rr == 0.0 {
        return Err(MetricError::Undefined("SI-SDR of a silent reference".into()));
    }
    let er: f64 = r.iter().zip(e).map(|(a, b)| a.as_f64() * b.as_f64()).sum();
    let alpha = er / rr;
    let target = alpha * alpha * rr;
    let residual: f64 = r.iter().zip(e).map(|(a, b)| (b.as_f64() - alpha * a.as_f64()).powi(2)).sum();
    if residual <= target * 10f64.powf(-SI_SDR_CEILING_DB / 10.0) {
        return Ok(SI_SDR_CEILING_DB);
    }
    if target == 0.0 {
        return Ok(-SI_SDR_CEILING_DB);
    }
    Ok((10.0 * (target / residual).log10()).clamp(-SI_SDR_CEILING_DB, SI_SDR_CEILING_DB))
}
