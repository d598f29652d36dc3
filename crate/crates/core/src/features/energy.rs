use crate::error::{Error, Result};
use crate::signal::{self, AudioSignal, WindowKind};
use crate::vad::{self, VadConfig};

use super::mean_std;

/// Short-time energy over Hamming-windowed frames at the VAD frame geometry.
pub fn frame_energies(signal: &AudioSignal, cfg: &VadConfig) -> Result<Vec<f64>> {
    let frames = signal::frame(signal, cfg.frame_ms, cfg.hop_ms, WindowKind::Hamming)?;
    vad::short_time_energy(&frames)
}

/// Energy mean and std, mean absolute first difference, std of the first
/// difference.
pub fn energy_stats(energies: &[f64]) -> Result<[f64; 4]> {
    if energies.len() < 2 {
        return Err(Error::TooShort {
            got: energies.len(),
            need: 2,
        });
    }
    let (e_mean, e_std) = mean_std(energies);
    let diffs: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (d_abs_mean, _) = mean_std(&abs);
    let (_, d_std) = mean_std(&diffs);
    Ok([e_mean, e_std, d_abs_mean, d_std])
}

pub fn energy_features(signal: &AudioSignal, cfg: &VadConfig) -> Result<[f64; 4]> {
    energy_stats(&frame_energies(signal, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silence_is_all_zero() {
        let s = AudioSignal::new(vec![0.0; 16000], 16000, "z").unwrap();
        assert_eq!(energy_features(&s, &VadConfig::default()).unwrap(), [0.0; 4]);
    }

    #[test]
    fn needs_two_frames() {
        let s = AudioSignal::new(vec![0.1; 500], 16000, "z").unwrap();
        assert!(matches!(
            energy_features(&s, &VadConfig::default()),
            Err(Error::TooShort { got: 1, need: 2 })
        ));
    }
}
