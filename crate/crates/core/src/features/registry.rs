//! The canonical 80-column feature registry.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::Error;

pub const FEATURE_COUNT: usize = 80;

pub const DURATION: Range<usize> = 0..22;
pub const ENERGY: Range<usize> = 22..26;
pub const CENTROID: Range<usize> = 26..28;
pub const MFCC: Range<usize> = 28..52;
pub const ACOUSTIC: Range<usize> = 52..63;
pub const VOICE_QUALITY: Range<usize> = 63..68;
pub const DURATION_RATIO: Range<usize> = 68..70;
pub const CFD: Range<usize> = 70..75;
pub const PE: Range<usize> = 75..80;

#[rustfmt::skip]
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "voiced_dur_mean", "voiced_dur_max", "voiced_dur_min", "voiced_pct",
    "voiced_hist_50_100ms", "voiced_hist_100_200ms", "voiced_hist_200_400ms",
    "voiced_hist_400_800ms", "voiced_hist_800_1600ms", "voiced_hist_1600ms_plus",
    "voiced_dur_slope",
    "unvoiced_dur_mean", "unvoiced_dur_max", "unvoiced_dur_min", "unvoiced_pct",
    "unvoiced_hist_50_100ms", "unvoiced_hist_100_200ms", "unvoiced_hist_200_400ms",
    "unvoiced_hist_400_800ms", "unvoiced_hist_800_1600ms", "unvoiced_hist_1600ms_plus",
    "unvoiced_dur_slope",
    "energy_mean", "energy_std", "denergy_abs_mean", "denergy_std",
    "centroid_mean", "centroid_std",
    "mfcc1_mean", "mfcc2_mean", "mfcc3_mean", "mfcc4_mean", "mfcc5_mean", "mfcc6_mean",
    "mfcc7_mean", "mfcc8_mean", "mfcc9_mean", "mfcc10_mean", "mfcc11_mean", "mfcc12_mean",
    "mfcc1_std", "mfcc2_std", "mfcc3_std", "mfcc4_std", "mfcc5_std", "mfcc6_std",
    "mfcc7_std", "mfcc8_std", "mfcc9_std", "mfcc10_std", "mfcc11_std", "mfcc12_std",
    "pitch_mean", "pitch_std", "pitch_max", "pitch_min",
    "intensity_mean", "intensity_std", "intensity_max", "intensity_min",
    "period_mean", "period_std", "rms",
    "jitter_local", "shimmer_local", "nhr", "hnr", "autocorr_mean",
    "unvoiced_frame_pct", "voice_break_pct",
    "cfd_win_mean", "cfd_win_std", "cfd_win_max", "cfd_win_min", "cfd_global",
    "pe3_win_mean", "pe3_win_std", "pe5_win_mean", "pe5_win_std", "pe5_global",
];

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

/// Column subsets used by the experiment: linear features, plus fractal
/// dimension, plus permutation entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureSet {
    Lf,
    LfCfd,
    #[default]
    LfCfdPe,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Lf, FeatureSet::LfCfd, FeatureSet::LfCfdPe];

    pub fn columns(self) -> Vec<usize> {
        let end = match self {
            FeatureSet::Lf => DURATION_RATIO.end,
            FeatureSet::LfCfd => CFD.end,
            FeatureSet::LfCfdPe => PE.end,
        };
        (0..end).collect()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Lf => "LF",
            FeatureSet::LfCfd => "LF+CFD",
            FeatureSet::LfCfdPe => "LF+CFD+PE",
        })
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LF" => Ok(FeatureSet::Lf),
            "LF+CFD" => Ok(FeatureSet::LfCfd),
            "LF+CFD+PE" => Ok(FeatureSet::LfCfdPe),
            other => Err(Error::InvalidParameter(format!(
                "unknown feature set {other:?} (expected LF, LF+CFD or LF+CFD+PE)"
            ))),
        }
    }
}
