//! Autocorrelation pitch tracking and the prosodic / voice-quality measures
//! built on it.

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::signal::AudioSignal;
use crate::vad::{self, FrameAnalysis, SegmentKind, SegmentMap, VadConfig, PITCH_CEILING_HZ, PITCH_FLOOR_HZ};

use super::mean_std;

/// Reference power for the intensity scale.
pub const INTENSITY_REFERENCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchFrame {
    /// Fundamental frequency; `None` on unvoiced frames.
    pub f0_hz: Option<f64>,
    /// Largest absolute sample over one pitch period from the frame centre
    /// (whole frame when unvoiced).
    pub peak_amplitude: f64,
    /// Normalized autocorrelation at the chosen pitch lag, in [0, 1].
    pub autocorr: f64,
}

impl PitchFrame {
    pub fn voiced(&self) -> bool {
        self.f0_hz.is_some()
    }

    pub fn period_s(&self) -> Option<f64> {
        self.f0_hz.map(|f| 1.0 / f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    frames: Vec<PitchFrame>,
}

impl PitchTrack {
    pub fn new(frames: Vec<PitchFrame>) -> Result<Self> {
        for (i, f) in frames.iter().enumerate() {
            if let Some(f0) = f.f0_hz {
                if !(PITCH_FLOOR_HZ..=PITCH_CEILING_HZ).contains(&f0) {
                    return Err(Error::InvalidParameter(format!("frame {i}: f0 {f0} Hz outside 75-400 Hz")));
                }
            }
            if !(0.0..=1.0).contains(&f.autocorr) || !f.peak_amplitude.is_finite() {
                return Err(Error::InvalidParameter(format!("frame {i}: autocorrelation outside [0, 1]")));
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[PitchFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn voiced(&self) -> impl Iterator<Item = &PitchFrame> {
        self.frames.iter().filter(|f| f.voiced())
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced().count()
    }
}

pub(crate) fn track_from_analysis(a: &FrameAnalysis, flags: &[bool], cfg: &VadConfig, sample_rate: u32) -> PitchTrack {
    let sr = sample_rate as f64;
    let half = a.frames.frame_len() / 2;
    // frames dropped from each end of a voiced run: enough hops that the
    // last kept frame ends before the last voiced frame starts
    let edge = a.frames.frame_len().div_ceil(a.frames.hop());
    let frames = (0..a.frames.len())
        .map(|i| {
            let frame = a.frames.frame(i);
            // frames near the edge of a voiced run straddle an onset or
            // offset, which skews the autocorrelation peak; they carry no f0
            let interior = (i.saturating_sub(edge)..=i + edge)
                .all(|j| flags.get(j).copied().unwrap_or(true));
            let candidate = a.pitch_lag[i].filter(|&(_, r)| interior && r >= cfg.voicing_autocorr_min);
            let f0_hz = candidate.map(|(lag, _)| (sr / lag).clamp(PITCH_FLOOR_HZ, PITCH_CEILING_HZ));
            let span = match f0_hz {
                Some(f0) => {
                    let period = ((sr / f0).round() as usize).max(1);
                    &frame[half..(half + period).min(frame.len())]
                }
                None => frame,
            };
            PitchFrame {
                f0_hz,
                peak_amplitude: span.iter().fold(0.0, |m, x| m.max(x.abs())),
                autocorr: candidate.map_or(0.0, |(_, r)| r),
            }
        })
        .collect();
    PitchTrack { frames }
}

/// Per-frame f0 from the autocorrelation peak in the 75-400 Hz band, with
/// parabolic refinement of the peak lag. Frames the voice detector rejects
/// carry no f0, and neither do the outermost frames at each end of a
/// voiced run.
pub fn pitch_track(signal: &AudioSignal, cfg: &VadConfig) -> Result<PitchTrack> {
    let a = vad::analyze_frames(signal, cfg, Execution::default())?;
    let flags = vad::voicing_from_analysis(&a, cfg);
    Ok(track_from_analysis(&a, &flags, cfg, signal.sample_rate()))
}

/// `10 log10(E / 1e-10)`, with silent frames pinned to 0 dB.
pub fn intensity_db(energy: f64) -> f64 {
    10.0 * (energy.max(INTENSITY_REFERENCE) / INTENSITY_REFERENCE).log10()
}

fn max_min(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    (
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        xs.iter().copied().fold(f64::INFINITY, f64::min),
    )
}

/// Pitch mean/std/max/min, intensity mean/std/max/min, period mean/std and
/// global RMS, from a track and the per-frame energies.
pub(crate) fn acoustic_from_energy(track: &PitchTrack, energies: &[f64], samples: &[f64]) -> [f64; 11] {
    let f0: Vec<f64> = track.voiced().filter_map(|f| f.f0_hz).collect();
    let periods: Vec<f64> = track.voiced().filter_map(|f| f.period_s()).collect();
    let (p_mean, p_std) = mean_std(&f0);
    let (p_max, p_min) = max_min(&f0);
    let intensity: Vec<f64> = energies.iter().map(|&e| intensity_db(e)).collect();
    let (i_mean, i_std) = mean_std(&intensity);
    let (i_max, i_min) = max_min(&intensity);
    let (t_mean, t_std) = mean_std(&periods);
    let rms = if samples.is_empty() {
        0.0
    } else {
        (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
    };
    [p_mean, p_std, p_max, p_min, i_mean, i_std, i_max, i_min, t_mean, t_std, rms]
}

pub fn acoustic_features(track: &PitchTrack, signal: &AudioSignal, cfg: &VadConfig) -> Result<[f64; 11]> {
    let energies = super::energy::frame_energies(signal, cfg)?;
    Ok(acoustic_from_energy(track, &energies, signal.samples()))
}

/// Local jitter (%), local shimmer (%), NHR, HNR (dB) and mean voiced
/// autocorrelation.
pub fn voice_quality(track: &PitchTrack) -> [f64; 5] {
    let voiced: Vec<&PitchFrame> = track.voiced().collect();
    if voiced.is_empty() {
        return [0.0; 5];
    }
    let mut d_period = Vec::new();
    let mut d_amp = Vec::new();
    for w in track.frames().windows(2) {
        if let (Some(t0), Some(t1)) = (w[0].period_s(), w[1].period_s()) {
            d_period.push((t1 - t0).abs());
            d_amp.push((w[1].peak_amplitude - w[0].peak_amplitude).abs());
        }
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let periods: Vec<f64> = voiced.iter().filter_map(|f| f.period_s()).collect();
    let amps: Vec<f64> = voiced.iter().map(|f| f.peak_amplitude).collect();
    let (jitter, shimmer) = if d_period.is_empty() {
        (0.0, 0.0)
    } else {
        let mean_amp = mean(&amps);
        let shimmer = if mean_amp > 0.0 { 100.0 * mean(&d_amp) / mean_amp } else { 0.0 };
        (100.0 * mean(&d_period) / mean(&periods), shimmer)
    };
    let r_mean = voiced.iter().map(|f| f.autocorr).sum::<f64>() / voiced.len() as f64;
    let r = r_mean.clamp(1e-6, 1.0 - 1e-6);
    let hnr = 10.0 * (r / (1.0 - r)).log10();
    let nhr = (1.0 - r) / r;
    [jitter, shimmer, nhr, hnr, r_mean]
}

/// Percentage of unvoiced frames, and percentage of the recording taken by
/// unvoiced segments lying between the first and last voiced segment.
pub fn duration_ratios(track: &PitchTrack, map: &SegmentMap) -> [f64; 2] {
    let fraction = if track.is_empty() {
        100.0
    } else {
        100.0 * (track.len() - track.voiced_count()) as f64 / track.len() as f64
    };
    let segs = map.segments();
    let first = segs.iter().position(|s| s.kind == SegmentKind::Voiced);
    let last = segs.iter().rposition(|s| s.kind == SegmentKind::Voiced);
    let breaks = match (first, last) {
        (Some(a), Some(b)) if b > a => segs[a + 1..b]
            .iter()
            .filter(|s| s.kind == SegmentKind::Unvoiced)
            .map(|s| s.duration_s())
            .sum::<f64>(),
        _ => 0.0,
    };
    let total = map.total_duration_s();
    [fraction, if total > 0.0 { 100.0 * breaks / total } else { 0.0 }]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(period_s: f64, amp: f64, r: f64) -> PitchFrame {
        PitchFrame {
            f0_hz: Some(1.0 / period_s),
            peak_amplitude: amp,
            autocorr: r,
        }
    }

    #[test]
    fn alternating_periods_give_two_percent_jitter() {
        let frames = (0..40)
            .map(|i| frame(if i % 2 == 0 { 0.0099 } else { 0.0101 }, 0.5, 0.9))
            .collect();
        let vq = voice_quality(&PitchTrack::new(frames).unwrap());
        assert!((vq[0] - 2.0).abs() < 1e-9, "{}", vq[0]);
        assert!(vq[1].abs() < 1e-12);
    }

    #[test]
    fn half_autocorrelation_gives_zero_hnr() {
        let frames = vec![frame(0.005, 0.5, 0.5); 3];
        let vq = voice_quality(&PitchTrack::new(frames).unwrap());
        assert!(vq[3].abs() < 1e-12);
        assert!((vq[2] - 1.0).abs() < 1e-12);
        assert!((vq[4] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unvoiced_track_conventions() {
        let frames = vec![
            PitchFrame {
                f0_hz: None,
                peak_amplitude: 0.0,
                autocorr: 0.0
            };
            10
        ];
        let t = PitchTrack::new(frames).unwrap();
        assert_eq!(voice_quality(&t), [0.0; 5]);
        let map = SegmentMap::from_durations(&[(1.0, SegmentKind::Unvoiced)]).unwrap();
        assert_eq!(duration_ratios(&t, &map), [100.0, 0.0]);
        let a = acoustic_from_energy(&t, &[0.0; 10], &[0.0; 100]);
        assert_eq!(a, [0.0; 11]);
    }

    #[test]
    fn voice_breaks_count_interior_pauses_only() {
        use SegmentKind::*;
        let map =
            SegmentMap::from_durations(&[(0.5, Unvoiced), (1.0, Voiced), (1.0, Unvoiced), (1.0, Voiced), (0.5, Unvoiced)])
                .unwrap();
        let t = PitchTrack::new(vec![frame(0.005, 0.5, 0.9)]).unwrap();
        let r = duration_ratios(&t, &map);
        assert_eq!(r[0], 0.0);
        assert!((r[1] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn track_rejects_out_of_band_pitch() {
        let bad = PitchFrame {
            f0_hz: Some(50.0),
            peak_amplitude: 0.1,
            autocorr: 0.9,
        };
        assert!(PitchTrack::new(vec![bad]).is_err());
    }
}
