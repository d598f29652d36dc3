//! Assembly of the 70 linear features.

use crate::error::Result;
use crate::par::{self, Execution};
use crate::signal::{self, AudioSignal, WindowKind};
use crate::vad::{self, SegmentMap, VadConfig};

use super::spectral::{SpectralAnalyzer, MFCC_COEFFS};
use super::{duration, energy, mean_std, pitch};

pub const LINEAR_COUNT: usize = 70;

/// Linear features in registry order: duration (22), energy (4), spectral
/// centroid (2), MFCC means then stds (24), acoustic (11), voice quality (5),
/// duration ratios (2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFeatureBlock {
    pub values: [f64; LINEAR_COUNT],
}

pub fn linear_block(signal: &AudioSignal, cfg: &VadConfig) -> Result<LinearFeatureBlock> {
    linear_block_with(signal, cfg, Execution::default()).map(|(b, _)| b)
}

/// Also returns the segment map the duration features were computed on.
pub fn linear_block_with(
    signal: &AudioSignal,
    cfg: &VadConfig,
    exec: Execution,
) -> Result<(LinearFeatureBlock, SegmentMap)> {
    let analysis = vad::analyze_frames(signal, cfg, exec)?;
    let flags = vad::voicing_from_analysis(&analysis, cfg);
    let map = vad::segments_from_flags(
        &flags,
        &analysis.frames,
        signal.duration_s(),
        cfg.min_segment_ms / 1000.0,
    );
    let track = pitch::track_from_analysis(&analysis, &flags, cfg, signal.sample_rate());

    let windowed = signal::frame(signal, cfg.frame_ms, cfg.hop_ms, WindowKind::Hamming)?;
    let energies = vad::short_time_energy(&windowed)?;

    // Spectral shape is summarised over voiced frames only, so the amount of
    // silence in a recording does not leak into timbre features.
    let spectral = SpectralAnalyzer::new(windowed.frame_len(), signal.sample_rate())?;
    let voiced_idx: Vec<usize> = (0..windowed.len()).filter(|&i| flags[i]).collect();
    let per_frame = par::map(exec, &voiced_idx, |&i| spectral.analyze(windowed.frame(i)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let centroids: Vec<f64> = per_frame.iter().map(|(c, _)| *c).collect();

    let mut values = [0.0; LINEAR_COUNT];
    let mut at = 0;
    let mut put = |xs: &[f64]| {
        values[at..at + xs.len()].copy_from_slice(xs);
        at += xs.len();
    };
    put(&duration::duration_features(&map));
    put(&energy::energy_stats(&energies)?);
    let (c_mean, c_std) = mean_std(&centroids);
    put(&[c_mean, c_std]);
    let mut mfcc_mean = [0.0; MFCC_COEFFS];
    let mut mfcc_std = [0.0; MFCC_COEFFS];
    for k in 0..MFCC_COEFFS {
        let col: Vec<f64> = per_frame.iter().map(|(_, c)| c[k]).collect();
        (mfcc_mean[k], mfcc_std[k]) = mean_std(&col);
    }
    put(&mfcc_mean);
    put(&mfcc_std);
    put(&pitch::acoustic_from_energy(&track, &energies, signal.samples()));
    put(&pitch::voice_quality(&track));
    put(&pitch::duration_ratios(&track, &map));
    debug_assert_eq!(at, LINEAR_COUNT);
    Ok((LinearFeatureBlock { values }, map))
}
