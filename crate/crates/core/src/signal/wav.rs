use std::path::Path;

use hound::{SampleFormat, WavSpec};

use crate::scalar::Real;

use super::{AudioBuffer, Result, SignalError};

/// Sample encoding for [`write_wav`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Pcm24,
    Float32,
}

/// Outcome of a write: how many samples had to be clipped to [-1, 1].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WriteReport {
    pub clipped: usize,
}

fn map_hound(err: hound::Error) -> SignalError {
    match err {
        hound::Error::IoError(e) => SignalError::Io(e),
        other => SignalError::Format(other.to_string()),
    }
}

/// Read a PCM16, PCM24 or float32 WAV file with one or two channels.
/// Integer samples are scaled by `2^-(bits-1)`.
pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioBuffer<T>> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(map_hound)?;
    let spec = reader.spec();
    let nch = spec.channels as usize;
    if !(1..=2).contains(&nch) {
        return Err(SignalError::Format(format!("{nch} channels not supported")));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) | (SampleFormat::Int, 24) => {
            let scale = 1.0 / (1u32 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(SignalError::Format(format!("{bits}-bit {fmt:?} samples not supported")));
        }
    };

    if !interleaved.len().is_multiple_of(nch) {
        return Err(SignalError::Io(std::io::Error::new(
            std::io::ErrorKind::UnexpectedEof,
            "incomplete sample frame",
        )));
    }
    let mut channels = vec![Vec::with_capacity(interleaved.len() / nch); nch];
    for (i, v) in interleaved.into_iter().enumerate() {
        channels[i % nch].push(T::lit(v));
    }
    AudioBuffer::new(spec.sample_rate, channels)
}

/// Write `buffer` to `path`. Samples outside [-1, 1] are clipped and counted.
pub fn write_wav<T: Real>(buffer: &AudioBuffer<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<WriteReport> {
    let (bits, format) = match depth {
        BitDepth::Pcm16 => (16, SampleFormat::Int),
        BitDepth::Pcm24 => (24, SampleFormat::Int),
        BitDepth::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    let mut report = WriteReport::default();
    let full_scale = (1i64 << (bits - 1)) as f64;

    for i in 0..buffer.len() {
        for ch in buffer.channels() {
            let mut x = ch[i].as_f64();
            if x.abs() > 1.0 {
                report.clipped += 1;
                x = x.clamp(-1.0, 1.0);
            }
            match depth {
                BitDepth::Float32 => writer.write_sample(x as f32),
                BitDepth::Pcm16 | BitDepth::Pcm24 => {
                    let v = (x * full_scale).round().clamp(-full_scale, full_scale - 1.0) as i32;
                    writer.write_sample(v)
                }
            }
            .map_err(map_hound)?;
        }
    }
    writer.finalize().map_err(map_hound)?;
    Ok(report)
}
