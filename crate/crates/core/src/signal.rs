//! Audio loading and framing.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

pub const SUPPORTED_RATES: [u32; 5] = [8000, 16000, 22050, 44100, 48000];

/// A mono recording with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioSignal {
    /// Wraps already-normalized samples. Rejects empty input, unsupported
    /// rates and any sample that is non-finite or outside [-1, 1].
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        check_rate(sample_rate)?;
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > 1.0)
        {
            return Err(Error::InvalidSample { index, value });
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    /// Subtracts the mean and, if the result leaves [-1, 1], rescales by the
    /// peak so the canonical range holds.
    pub fn from_raw(mut samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample {
                index,
                value: samples[index],
            });
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.iter_mut().for_each(|x| *x -= mean);
        let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak > 1.0 {
            samples.iter_mut().for_each(|x| *x /= peak);
        }
        Self::new(samples, sample_rate, source_id)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Number of samples spanned by `ms` milliseconds at this rate.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.sample_rate)
    }

    /// Multiplies every sample by `c`, which must keep the range valid.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|x| x * c).collect(),
            self.sample_rate,
            self.source_id.clone(),
        )
    }
}

fn check_rate(rate: u32) -> Result<()> {
    if SUPPORTED_RATES.contains(&rate) {
        Ok(())
    } else {
        Err(Error::UnsupportedRate(rate))
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    (ms * sample_rate as f64 / 1000.0).round() as usize
}

/// Reads a PCM16 or float32 RIFF/WAVE file, downmixes stereo and removes DC.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedChannels(spec.channels));
    }
    check_rate(spec.sample_rate)?;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {fmt:?} (accepted: 16-bit integer PCM, 32-bit float)"),
            })
        }
    };
    let mono: Vec<f64> = match spec.channels {
        1 => interleaved,
        _ => interleaved.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect(),
    };
    let source_id = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioSignal::from_raw(mono, spec.sample_rate, source_id)
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}

/// Writes samples as mono 16-bit PCM, clipping to [-1, 1].
pub fn write_wav_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &x in samples {
        let q = (x.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(q).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Rectangular,
    Hamming,
}

/// Symmetric Hamming window: `0.54 - 0.46 cos(2 pi k / (len - 1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / denom).cos())
        .collect()
}

/// Fixed-length windows cut from a signal; the tail that does not fill a
/// whole frame is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    data: Vec<f64>,
    frame_len: usize,
    hop: usize,
    window_kind: WindowKind,
    sample_rate: u32,
}

impl FrameSequence {
    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.frame_len..(i + 1) * self.frame_len]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.frame_len)
    }

    /// All frames laid end to end.
    pub fn concatenated(&self) -> &[f64] {
        &self.data
    }
}

/// Number of whole frames of `frame_len` samples at stride `hop`.
pub fn frame_count(n_samples: usize, frame_len: usize, hop: usize) -> usize {
    if n_samples < frame_len || frame_len == 0 || hop == 0 {
        0
    } else {
        (n_samples - frame_len) / hop + 1
    }
}

/// Cuts `signal` into frames of `frame_ms` every `hop_ms`, both rounded to
/// whole samples.
pub fn frame(signal: &AudioSignal, frame_ms: f64, hop_ms: f64, window_kind: WindowKind) -> Result<FrameSequence> {
    if !(hop_ms > 0.0 && frame_ms >= hop_ms) {
        return Err(Error::InvalidParameter(format!(
            "need frame_ms >= hop_ms > 0, got frame_ms = {frame_ms}, hop_ms = {hop_ms}"
        )));
    }
    let frame_len = signal.ms_to_samples(frame_ms);
    let hop = signal.ms_to_samples(hop_ms).max(1);
    frame_samples(signal.samples(), signal.sample_rate(), frame_len, hop, window_kind)
}

pub fn frame_samples(
    samples: &[f64],
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    window_kind: WindowKind,
) -> Result<FrameSequence> {
    if frame_len == 0 || hop == 0 {
        return Err(Error::InvalidParameter("frame length and hop must be positive".into()));
    }
    if samples.len() < frame_len {
        return Err(Error::TooShort {
            got: samples.len(),
            need: frame_len,
        });
    }
    let count = frame_count(samples.len(), frame_len, hop);
    let window = match window_kind {
        WindowKind::Rectangular => None,
        WindowKind::Hamming => Some(hamming(frame_len)),
    };
    let mut data = Vec::with_capacity(count * frame_len);
    for i in 0..count {
        let chunk = &samples[i * hop..i * hop + frame_len];
        match &window {
            None => data.extend_from_slice(chunk),
            Some(w) => data.extend(chunk.iter().zip(w).map(|(x, w)| x * w)),
        }
    }
    Ok(FrameSequence {
        data,
        frame_len,
        hop,
        window_kind,
        sample_rate,
    })
}
