//! Per-recording feature extraction.

pub mod duration;
pub mod energy;
pub mod linear;
pub mod nonlinear;
pub mod pitch;
pub mod registry;
pub mod spectral;

pub use duration::duration_features;
pub use energy::energy_features;
pub use linear::{linear_block, linear_block_with, LinearFeatureBlock};
pub use nonlinear::{castiglioni_fd, nld_block, nld_block_with, permutation_entropy, NldConfig, NldFeatureBlock};
pub use pitch::{acoustic_features, duration_ratios, pitch_track, voice_quality, PitchFrame, PitchTrack};
pub use registry::{feature_index, FeatureSet, FEATURE_COUNT, FEATURE_NAMES};
pub use spectral::{mfcc, spectral_centroid, SpectralAnalyzer};

/// Mean and population standard deviation; `(0, 0)` for an empty slice.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
