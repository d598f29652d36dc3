//! Voiced/unvoiced segmentation.
//!
//! A frame is voiced when its short-time energy clears a fraction of the
//! recording's own 95th-percentile frame energy and its normalized
//! autocorrelation peaks above a threshold somewhere in the 75-400 Hz lag
//! band. Both tests are scale-free, so the flag pattern does not depend on
//! recording gain.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::signal::{self, AudioSignal, FrameSequence, WindowKind};

pub const PITCH_FLOOR_HZ: f64 = 75.0;
pub const PITCH_CEILING_HZ: f64 = 400.0;

/// Penalty per octave of lag above the shortest admissible lag. Keeps the
/// pitch picker on the fundamental when a multiple of the period correlates
/// equally well.
const OCTAVE_COST: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct VadConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    /// Fraction of the 95th-percentile frame energy below which a frame is
    /// treated as low-energy.
    pub energy_floor_ratio: f64,
    pub voicing_autocorr_min: f64,
    pub min_segment_ms: f64,
    pub hangover_frames: usize,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            energy_floor_ratio: 0.03,
            voicing_autocorr_min: 0.45,
            min_segment_ms: 50.0,
            hangover_frames: 2,
        }
    }
}

impl VadConfig {
    pub fn validate(&self) -> Result<()> {
        let ratio_ok = |v: f64| v > 0.0 && v < 1.0;
        if !ratio_ok(self.energy_floor_ratio) {
            return Err(Error::InvalidParameter(format!(
                "energy_floor_ratio must be in (0, 1), got {}",
                self.energy_floor_ratio
            )));
        }
        if !ratio_ok(self.voicing_autocorr_min) {
            return Err(Error::InvalidParameter(format!(
                "voicing_autocorr_min must be in (0, 1), got {}",
                self.voicing_autocorr_min
            )));
        }
        if !(self.hop_ms > 0.0 && self.frame_ms >= self.hop_ms && self.min_segment_ms > 0.0) {
            return Err(Error::InvalidParameter(
                "durations must be positive with frame_ms >= hop_ms".into(),
            ));
        }
        Ok(())
    }
}

/// Mean square of each frame.
pub fn short_time_energy(frames: &FrameSequence) -> Result<Vec<f64>> {
    if frames.is_empty() {
        return Err(Error::Degenerate("no frames".into()));
    }
    let n = frames.frame_len() as f64;
    Ok(frames
        .iter()
        .map(|f| f.iter().map(|x| x * x).sum::<f64>() / n)
        .collect())
}

/// Normalized cross-correlation of a frame with itself shifted by `lag`,
/// computed over the overlapping part only. Zero when either side is silent.
pub fn normalized_autocorrelation(frame: &[f64], lag: usize) -> f64 {
    if lag >= frame.len() {
        return 0.0;
    }
    let (head, tail) = (&frame[..frame.len() - lag], &frame[lag..]);
    let mut num = 0.0;
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    for (a, b) in head.iter().zip(tail) {
        num += a * b;
        e1 += a * a;
        e2 += b * b;
    }
    let denom = (e1 * e2).sqrt();
    if denom > 0.0 {
        num / denom
    } else {
        0.0
    }
}

/// Admissible autocorrelation lags for the 75-400 Hz pitch band, clipped to
/// the frame.
pub fn pitch_lag_range(sample_rate: u32, frame_len: usize) -> (usize, usize) {
    let sr = sample_rate as f64;
    let lo = (sr / PITCH_CEILING_HZ).ceil() as usize;
    let hi = ((sr / PITCH_FLOOR_HZ).floor() as usize).min(frame_len.saturating_sub(2));
    (lo.max(2), hi)
}

/// Per-frame measurements shared by the voicing decision and pitch tracker.
#[derive(Debug, Clone)]
pub(crate) struct FrameAnalysis {
    pub energy: Vec<f64>,
    /// Highest normalized autocorrelation in the pitch lag band.
    pub peak_corr: Vec<f64>,
    /// Interpolated lag (samples) of the pitch candidate, with its correlation.
    pub pitch_lag: Vec<Option<(f64, f64)>>,
    pub frames: FrameSequence,
}

pub(crate) fn analyze_frames(signal: &AudioSignal, cfg: &VadConfig, exec: Execution) -> Result<FrameAnalysis> {
    cfg.validate()?;
    let frames = signal::frame(signal, cfg.frame_ms, cfg.hop_ms, WindowKind::Rectangular)?;
    let energy = short_time_energy(&frames)?;
    let (lo, hi) = pitch_lag_range(signal.sample_rate(), frames.frame_len());
    let per_frame = par::map_range(exec, frames.len(), |i| frame_pitch(frames.frame(i), lo, hi));
    let (peak_corr, pitch_lag) = per_frame.into_iter().unzip();
    Ok(FrameAnalysis {
        energy,
        peak_corr,
        pitch_lag,
        frames,
    })
}

fn frame_pitch(frame: &[f64], lo: usize, hi: usize) -> (f64, Option<(f64, f64)>) {
    if hi < lo {
        return (0.0, None);
    }
    // r[j] holds the correlation at lag lo - 1 + j so the parabola always
    // has both neighbours.
    let r: Vec<f64> = (lo - 1..=hi + 1)
        .map(|lag| normalized_autocorrelation(frame, lag))
        .collect();
    let mut peak = f64::NEG_INFINITY;
    let mut best: Option<(usize, f64)> = None;
    for lag in lo..=hi {
        let v = r[lag - lo + 1];
        peak = peak.max(v);
        let score = v - OCTAVE_COST * (lag as f64 / lo as f64).log2();
        if v > 0.0 && best.is_none_or(|(_, s)| score > s) {
            best = Some((lag, score));
        }
    }
    let peak = peak.max(0.0);
    let pitch = best.map(|(lag, _)| {
        let j = lag - lo + 1;
        let (a, b, c) = (r[j - 1], r[j], r[j + 1]);
        let curv = a - 2.0 * b + c;
        let shift = if curv < 0.0 {
            (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        (lag as f64 + shift, b.clamp(0.0, 1.0))
    });
    (peak, pitch)
}

/// Linear-interpolated percentile of an unsorted sample, `q` in [0, 1].
pub(crate) fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

pub(crate) fn voicing_from_analysis(a: &FrameAnalysis, cfg: &VadConfig) -> Vec<bool> {
    let floor = cfg.energy_floor_ratio * percentile(&a.energy, 0.95);
    let raw: Vec<bool> = a
        .energy
        .iter()
        .zip(&a.peak_corr)
        .map(|(&e, &r)| e > 0.0 && e >= floor && r >= cfg.voicing_autocorr_min)
        .collect();
    bridge_gaps(raw, cfg.hangover_frames)
}

/// Carries the voiced state across unvoiced gaps of at most `hangover`
/// frames that are followed by renewed voicing.
fn bridge_gaps(mut flags: Vec<bool>, hangover: usize) -> Vec<bool> {
    if hangover == 0 {
        return flags;
    }
    let mut last_voiced: Option<usize> = None;
    for i in 0..flags.len() {
        if flags[i] {
            if let Some(prev) = last_voiced {
                let gap = i - prev - 1;
                if gap > 0 && gap <= hangover {
                    flags[prev + 1..i].iter_mut().for_each(|f| *f = true);
                }
            }
            last_voiced = Some(i);
        }
    }
    flags
}

/// Per-frame voiced flag on 25 ms / 10 ms rectangular frames (by default).
pub fn frame_voicing(signal: &AudioSignal, cfg: &VadConfig) -> Result<Vec<bool>> {
    let a = analyze_frames(signal, cfg, Execution::default())?;
    Ok(voicing_from_analysis(&a, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Voiced,
    Unvoiced,
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentKind::Voiced => "voiced",
            SegmentKind::Unvoiced => "unvoiced",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_s: f64,
    pub end_s: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Contiguous, maximal voiced/unvoiced runs covering `[0, total_duration_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMap {
    segments: Vec<Segment>,
    total_duration_s: f64,
}

impl SegmentMap {
    pub fn new(segments: Vec<Segment>, total_duration_s: f64) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("segment map: {m}")));
        let (Some(first), Some(last)) = (segments.first(), segments.last()) else {
            return bad("no segments");
        };
        if first.start_s != 0.0 || last.end_s != total_duration_s {
            return bad("segments must span [0, total_duration]");
        }
        for s in &segments {
            if !(s.end_s > s.start_s) {
                return bad("empty or reversed segment");
            }
        }
        for w in segments.windows(2) {
            if w[0].end_s != w[1].start_s {
                return bad("segments must be contiguous");
            }
            if w[0].kind == w[1].kind {
                return bad("adjacent segments must differ in kind");
            }
        }
        Ok(Self {
            segments,
            total_duration_s,
        })
    }

    /// Builds a map from consecutive `(duration, kind)` pairs; equal
    /// neighbouring kinds are merged.
    pub fn from_durations(parts: &[(f64, SegmentKind)]) -> Result<Self> {
        let mut segments: Vec<Segment> = Vec::new();
        let mut t = 0.0;
        for &(d, kind) in parts {
            let end = t + d;
            match segments.last_mut() {
                Some(last) if last.kind == kind => last.end_s = end,
                _ => segments.push(Segment {
                    start_s: t,
                    end_s: end,
                    kind,
                }),
            }
            t = end;
        }
        Self::new(segments, t)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration_s(&self) -> f64 {
        self.total_duration_s
    }

    pub fn of_kind(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.kind == kind)
    }

    /// Tab-separated `start_s end_s kind`, one line per segment.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            let _ = writeln!(out, "{:.6}\t{:.6}\t{}", s.start_s, s.end_s, s.kind);
        }
        out
    }
}

/// Start time of the region attributed to frame `i`: frames own a hop-wide
/// slot centred on the frame centre.
fn frame_boundary_s(i: usize, frames: &FrameSequence) -> f64 {
    let centre = i as f64 * frames.hop() as f64 + frames.frame_len() as f64 / 2.0;
    (centre - frames.hop() as f64 / 2.0) / frames.sample_rate() as f64
}

pub(crate) fn segments_from_flags(
    flags: &[bool],
    frames: &FrameSequence,
    total_duration_s: f64,
    min_segment_s: f64,
) -> SegmentMap {
    let kind_of = |v: bool| if v { SegmentKind::Voiced } else { SegmentKind::Unvoiced };
    let mut runs: Vec<Segment> = Vec::new();
    for (i, &v) in flags.iter().enumerate() {
        let kind = kind_of(v);
        match runs.last_mut() {
            Some(last) if last.kind == kind => {}
            Some(last) => {
                let b = frame_boundary_s(i, frames);
                last.end_s = b;
                runs.push(Segment {
                    start_s: b,
                    end_s: total_duration_s,
                    kind,
                });
            }
            None => runs.push(Segment {
                start_s: 0.0,
                end_s: total_duration_s,
                kind,
            }),
        }
    }
    if runs.is_empty() {
        runs.push(Segment {
            start_s: 0.0,
            end_s: total_duration_s,
            kind: SegmentKind::Unvoiced,
        });
    }
    let runs = absorb_short_runs(runs, min_segment_s);
    SegmentMap::new(runs, total_duration_s).expect("runs built contiguous and maximal")
}

/// Relabels the first too-short run with its left neighbour's kind (right
/// neighbour for the first run), merges, and repeats.
fn absorb_short_runs(mut runs: Vec<Segment>, min_s: f64) -> Vec<Segment> {
    const EPS: f64 = 1e-9;
    while runs.len() > 1 {
        let Some(idx) = runs.iter().position(|s| s.duration_s() < min_s - EPS) else {
            break;
        };
        runs[idx].kind = if idx > 0 { runs[idx - 1].kind } else { runs[idx + 1].kind };
        let mut merged: Vec<Segment> = Vec::with_capacity(runs.len());
        for s in runs {
            match merged.last_mut() {
                Some(last) if last.kind == s.kind => last.end_s = s.end_s,
                _ => merged.push(s),
            }
        }
        runs = merged;
    }
    runs
}

pub fn segment_voicing(signal: &AudioSignal, cfg: &VadConfig) -> Result<SegmentMap> {
    let a = analyze_frames(signal, cfg, Execution::default())?;
    let flags = voicing_from_analysis(&a, cfg);
    Ok(segments_from_flags(
        &flags,
        &a.frames,
        signal.duration_s(),
        cfg.min_segment_ms / 1000.0,
    ))
}
