use crate::scalar::Sample;

use super::{AudioBuffer, Result, SignalError};

fn half<T: Sample>(x: T) -> T {
    x / (T::one() + T::one())
}

/// Mid/side split: `M = (L + R) / 2`, `S = (L - R) / 2`.
pub fn ms_encode<T: Sample>(stereo: &AudioBuffer<T>) -> Result<(AudioBuffer<T>, AudioBuffer<T>)> {
    if stereo.num_channels() != 2 {
        return Err(SignalError::Arity(format!("mid/side needs 2 channels, got {}", stereo.num_channels())));
    }
    let (l, r) = (stereo.channel(0), stereo.channel(1));
    let mid = l.iter().zip(r).map(|(a, b)| half(a.clone() + b.clone())).collect();
    let side = l.iter().zip(r).map(|(a, b)| half(a.clone() - b.clone())).collect();
    Ok((AudioBuffer::mono(stereo.sample_rate(), mid)?, AudioBuffer::mono(stereo.sample_rate(), side)?))
}

/// Inverse of [`ms_encode`]: `L = M + S`, `R = M - S`.
pub fn ms_decode<T: Sample>(mid: &AudioBuffer<T>, side: &AudioBuffer<T>) -> Result<AudioBuffer<T>> {
    if mid.num_channels() != 1 || side.num_channels() != 1 {
        return Err(SignalError::Arity("mid and side must be mono".into()));
    }
    if mid.len() != side.len() || mid.sample_rate() != side.sample_rate() {
        return Err(SignalError::Arity("mid and side differ in length or rate".into()));
    }
    let (m, s) = (mid.channel(0), side.channel(0));
    let l = m.iter().zip(s).map(|(a, b)| a.clone() + b.clone()).collect();
    let r = m.iter().zip(s).map(|(a, b)| a.clone() - b.clone()).collect();
    AudioBuffer::stereo(mid.sample_rate(), l, r)
}

/// Passive downmix `(L + R) / 2`; mono input is returned unchanged.
pub fn downmix_mono<T: Sample>(buffer: &AudioBuffer<T>) -> AudioBuffer<T> {
    if buffer.num_channels() == 1 {
        return buffer.clone();
    }
    let (l, r) = (buffer.channel(0), buffer.channel(1));
    AudioBuffer::mono(buffer.sample_rate(), l.iter().zip(r).map(|(a, b)| half(a.clone() + b.clone())).collect())
        .expect("downmix of a valid buffer is valid")
}
