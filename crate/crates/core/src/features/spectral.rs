//! Magnitude-spectrum features: spectral centroid and MFCC.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MEL_FILTERS: usize = 26;
pub const MFCC_COEFFS: usize = 12;
pub const LOG_FLOOR: f64 = 1e-10;
pub const MFCC_MIN_FRAME: usize = 64;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Per-frame-length spectral analyser. Building one plans the FFT and lays
/// out the mel filterbank and DCT basis once; it is `Send + Sync` and can be
/// shared across threads.
pub struct SpectralAnalyzer {
    frame_len: usize,
    sample_rate: u32,
    fft: Arc<dyn Fft<f64>>,
    /// Sparse triangular weights `(bin, weight)` per filter.
    filters: Vec<Vec<(usize, f64)>>,
    /// `dct[k - 1][n]` for coefficients c1..c12.
    dct: Vec<[f64; MEL_FILTERS]>,
}

impl SpectralAnalyzer {
    pub fn new(frame_len: usize, sample_rate: u32) -> Result<Self> {
        if frame_len < 2 {
            return Err(Error::InvalidParameter(format!("frame length {frame_len} < 2")));
        }
        let fft = FftPlanner::new().plan_fft_forward(frame_len);
        let bins = frame_len / 2 + 1;
        let bin_hz = sample_rate as f64 / frame_len as f64;
        let mel_max = hz_to_mel(sample_rate as f64 / 2.0);
        let edges: Vec<f64> = (0..MEL_FILTERS + 2)
            .map(|j| mel_to_hz(mel_max * j as f64 / (MEL_FILTERS + 1) as f64))
            .collect();
        let filters = (0..MEL_FILTERS)
            .map(|m| {
                let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..bins)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f >= lo && f <= centre {
                            (f - lo) / (centre - lo)
                        } else if f > centre && f <= hi {
                            (hi - f) / (hi - centre)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w))
                    })
                    .collect()
            })
            .collect();
        let n = MEL_FILTERS as f64;
        let scale = (2.0 / n).sqrt();
        let dct = (1..=MFCC_COEFFS)
            .map(|k| {
                let mut row = [0.0; MEL_FILTERS];
                for (i, v) in row.iter_mut().enumerate() {
                    *v = scale * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos();
                }
                row
            })
            .collect();
        Ok(Self {
            frame_len,
            sample_rate,
            fft,
            filters,
            dct,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// `|X_k|` for bins `0..=frame_len/2`.
    pub fn magnitude_spectrum(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != self.frame_len {
            return Err(Error::DimensionMismatch {
                expected: self.frame_len,
                got: frame.len(),
            });
        }
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.process(&mut buf);
        Ok(buf[..self.frame_len / 2 + 1].iter().map(|c| c.norm()).collect())
    }

    pub fn centroid_of(&self, mag: &[f64]) -> f64 {
        let bin_hz = self.sample_rate as f64 / self.frame_len as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, &m) in mag.iter().enumerate() {
            num += k as f64 * bin_hz * m;
            den += m;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    pub fn mfcc_of(&self, mag: &[f64]) -> [f64; MFCC_COEFFS] {
        let mut log_mel = [0.0; MEL_FILTERS];
        for (out, filt) in log_mel.iter_mut().zip(&self.filters) {
            let e: f64 = filt.iter().map(|&(k, w)| w * mag[k]).sum();
            *out = e.max(LOG_FLOOR).ln();
        }
        let mut c = [0.0; MFCC_COEFFS];
        for (ck, row) in c.iter_mut().zip(&self.dct) {
            *ck = row.iter().zip(&log_mel).map(|(a, b)| a * b).sum();
        }
        c
    }

    /// Spectral centroid (Hz) and c1..c12 of one frame.
    pub fn analyze(&self, frame: &[f64]) -> Result<(f64, [f64; MFCC_COEFFS])> {
        let mag = self.magnitude_spectrum(frame)?;
        Ok((self.centroid_of(&mag), self.mfcc_of(&mag)))
    }
}

/// Magnitude-weighted mean frequency of a frame; 0 for a silent frame.
pub fn spectral_centroid(frame: &[f64], sample_rate: u32) -> Result<f64> {
    let a = SpectralAnalyzer::new(frame.len(), sample_rate)?;
    let mag = a.magnitude_spectrum(frame)?;
    Ok(a.centroid_of(&mag))
}

/// Mel-frequency cepstral coefficients c1..c12 of one (already windowed)
/// frame: 26 triangular filters over 0 to Nyquist, natural log floored at
/// 1e-10, orthonormal DCT-II.
pub fn mfcc(frame: &[f64], sample_rate: u32) -> Result<[f64; MFCC_COEFFS]> {
    if frame.len() < MFCC_MIN_FRAME {
        return Err(Error::TooShort {
            got: frame.len(),
            need: MFCC_MIN_FRAME,
        });
    }
    let a = SpectralAnalyzer::new(frame.len(), sample_rate)?;
    let mag = a.magnitude_spectrum(frame)?;
    Ok(a.mfcc_of(&mag))
}
