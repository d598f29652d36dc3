//! Synthetic fluency-task recordings: harmonic tone bursts ("words")
//! separated by pauses, one file per subject, plus a manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use super::corpus::{ClassLabel, MANIFEST_HEADER};
use crate::config::{key_values, parse_value};
use crate::error::{Error, Result};
use crate::signal::{write_wav_pcm16, SUPPORTED_RATES};

pub const MIN_BURST_MS: f64 = 60.0;
const FADE_MS: f64 = 10.0;

/// Relation between the harmonic phases of a burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase {
    /// All harmonics start in sine phase.
    #[default]
    Coherent,
    /// Independent uniform phase per harmonic and burst. The magnitude
    /// spectrum and autocorrelation are unchanged; the waveform shape is not.
    Random,
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "coherent" => Ok(Phase::Coherent),
            "random" => Ok(Phase::Random),
            _ => Err(format!("phase must be coherent or random, got {s:?}")),
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Coherent => "coherent",
            Phase::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    pub count: usize,
    pub burst_rate_per_min: f64,
    pub burst_ms_mean: f64,
    pub burst_ms_std: f64,
    pub f0_mean_hz: f64,
    /// Spread of the per-burst fundamental.
    pub f0_std_hz: f64,
    /// Relative standard deviation of each glottal period.
    pub jitter: f64,
    pub pause_min_ms: f64,
    /// Gamma shape of the pause lengths above the minimum; small values give
    /// irregular pauses.
    pub pause_shape: f64,
    /// Standard deviation of the additive Gaussian floor.
    pub noise_floor: f64,
    pub amplitude: f64,
    pub harmonics: usize,
    pub phase: Phase,
}

impl Default for ClassParams {
    fn default() -> Self {
        Self {
            count: 50,
            burst_rate_per_min: 20.0,
            burst_ms_mean: 450.0,
            burst_ms_std: 100.0,
            f0_mean_hz: 140.0,
            f0_std_hz: 20.0,
            jitter: 0.01,
            pause_min_ms: 200.0,
            pause_shape: 2.0,
            noise_floor: 0.002,
            amplitude: 0.5,
            harmonics: 8,
            phase: Phase::Coherent,
        }
    }
}

impl ClassParams {
    /// Number of bursts in a recording of `duration_s` seconds.
    pub fn bursts_for(&self, duration_s: f64) -> usize {
        (self.burst_rate_per_min * duration_s / 60.0).round() as usize
    }

    fn validate(&self, label: ClassLabel) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{label}.{what}")));
        if !(self.burst_rate_per_min >= 0.0) || !(self.burst_ms_mean >= MIN_BURST_MS) || !(self.burst_ms_std >= 0.0) {
            return bad("burst parameters must be non-negative with burst_ms_mean >= 60");
        }
        if !(self.f0_mean_hz >= 80.0 && self.f0_mean_hz <= 380.0) || !(self.f0_std_hz >= 0.0) {
            return bad("f0_mean_hz must lie in [80, 380] Hz");
        }
        if !(0.0..0.2).contains(&self.jitter) {
            return bad("jitter must lie in [0, 0.2)");
        }
        if !(self.pause_min_ms > 0.0) || !(self.pause_shape > 0.0) {
            return bad("pause_min_ms and pause_shape must be positive");
        }
        if !(self.noise_floor >= 0.0) || !(self.amplitude > 0.0 && self.amplitude <= 1.0) || self.harmonics == 0 {
            return bad("need noise_floor >= 0, amplitude in (0, 1], harmonics >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub classes: BTreeMap<ClassLabel, ClassParams>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            duration_s: 60.0,
            classes: ClassLabel::ALL.iter().map(|&c| (c, ClassParams::default())).collect(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_RATES.contains(&self.sample_rate) {
            return Err(Error::UnsupportedRate(self.sample_rate));
        }
        if !(self.duration_s >= 1.0) {
            return Err(Error::InvalidParameter("duration_s must be at least 1".into()));
        }
        if self.classes.values().all(|p| p.count == 0) {
            return Err(Error::InvalidParameter("spec generates no recordings".into()));
        }
        self.classes.iter().try_for_each(|(&l, p)| p.validate(l))
    }

    /// Parses `key = value` lines: `sample_rate`, `duration_s`, and
    /// `CR.<param>` / `MCI.<param>`. A class appears once any of its keys
    /// does; unset parameters keep their defaults.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut spec = SynthSpec {
            classes: BTreeMap::new(),
            ..Default::default()
        };
        for (line, key, value) in key_values(text, origin)? {
            macro_rules! set {
                ($field:expr) => {
                    $field = parse_value(origin, line, &key, &value)?
                };
            }
            let unknown = || Error::Parse {
                path: origin.to_string(),
                line,
                message: format!("unknown key {key:?}"),
            };
            match key.as_str() {
                "sample_rate" => set!(spec.sample_rate),
                "duration_s" => set!(spec.duration_s),
                _ => {
                    let (class, param) = key.split_once('.').ok_or_else(unknown)?;
                    let label: ClassLabel = class.parse().map_err(|m| Error::Parse {
                        path: origin.to_string(),
                        line,
                        message: m,
                    })?;
                    let p = spec.classes.entry(label).or_default();
                    match param {
                        "count" => set!(p.count),
                        "burst_rate_per_min" => set!(p.burst_rate_per_min),
                        "burst_ms_mean" => set!(p.burst_ms_mean),
                        "burst_ms_std" => set!(p.burst_ms_std),
                        "f0_mean_hz" => set!(p.f0_mean_hz),
                        "f0_std_hz" => set!(p.f0_std_hz),
                        "jitter" => set!(p.jitter),
                        "pause_min_ms" => set!(p.pause_min_ms),
                        "pause_shape" => set!(p.pause_shape),
                        "noise_floor" => set!(p.noise_floor),
                        "amplitude" => set!(p.amplitude),
                        "harmonics" => set!(p.harmonics),
                        "phase" => set!(p.phase),
                        _ => return Err(unknown()),
                    }
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sample_rate = {}", self.sample_rate);
        let _ = writeln!(s, "duration_s = {}", self.duration_s);
        for (c, p) in &self.classes {
            let _ = writeln!(s, "\n{c}.count = {}", p.count);
            let _ = writeln!(s, "{c}.burst_rate_per_min = {}", p.burst_rate_per_min);
            let _ = writeln!(s, "{c}.burst_ms_mean = {}", p.burst_ms_mean);
            let _ = writeln!(s, "{c}.burst_ms_std = {}", p.burst_ms_std);
            let _ = writeln!(s, "{c}.f0_mean_hz = {}", p.f0_mean_hz);
            let _ = writeln!(s, "{c}.f0_std_hz = {}", p.f0_std_hz);
            let _ = writeln!(s, "{c}.jitter = {}", p.jitter);
            let _ = writeln!(s, "{c}.pause_min_ms = {}", p.pause_min_ms);
            let _ = writeln!(s, "{c}.pause_shape = {}", p.pause_shape);
            let _ = writeln!(s, "{c}.noise_floor = {}", p.noise_floor);
            let _ = writeln!(s, "{c}.amplitude = {}", p.amplitude);
            let _ = writeln!(s, "{c}.harmonics = {}", p.harmonics);
            let _ = writeln!(s, "{c}.phase = {}", p.phase);
        }
        s
    }
}

/// Burst onsets and lengths in seconds.
pub fn burst_layout<R: Rng + ?Sized>(p: &ClassParams, duration_s: f64, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    let n = p.bursts_for(duration_s);
    if n == 0 {
        return Ok(Vec::new());
    }
    let normal = Normal::new(p.burst_ms_mean, p.burst_ms_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut lengths: Vec<f64> = (0..n)
        .map(|_| normal.sample(rng).max(MIN_BURST_MS) / 1000.0)
        .collect();
    let pause_min = p.pause_min_ms / 1000.0;
    let room = duration_s - (n + 1) as f64 * pause_min;
    let speech: f64 = lengths.iter().sum();
    if room <= n as f64 * MIN_BURST_MS / 1000.0 {
        return Err(Error::InvalidParameter(format!(
            "{n} bursts with {} ms pauses do not fit in {duration_s} s",
            p.pause_min_ms
        )));
    }
    if speech > room {
        let k = room / speech;
        lengths.iter_mut().for_each(|l| *l *= k);
    }
    let free = (room - lengths.iter().sum::<f64>()).max(0.0);
    let gamma = Gamma::new(p.pause_shape, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let weights: Vec<f64> = (0..=n).map(|_| gamma.sample(rng)).collect();
    let total_w: f64 = weights.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n);
    for (i, len) in lengths.into_iter().enumerate() {
        t += pause_min + free * weights[i] / total_w;
        out.push((t, len));
        t += len;
    }
    Ok(out)
}

/// Adds one harmonic burst into `buf` starting at sample `start`.
fn render_burst<R: Rng + ?Sized>(buf: &mut [f64], start: usize, len: usize, sr: f64, p: &ClassParams, rng: &mut R) -> Result<()> {
    let f0 = Normal::new(p.f0_mean_hz, p.f0_std_hz)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(rng)
        .clamp(80.0, 380.0);
    let harmonics: Vec<usize> = (1..=p.harmonics).filter(|&k| (k as f64) * f0 < 0.45 * sr).collect();
    let phases: Vec<f64> = harmonics
        .iter()
        .map(|_| match p.phase {
            Phase::Coherent => 0.0,
            Phase::Random => rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    let norm: f64 = harmonics.iter().map(|&k| 1.0 / k as f64).sum();
    let jitter = Normal::new(0.0, p.jitter.max(0.0)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let fade = ((FADE_MS / 1000.0 * sr) as usize).min(len / 2).max(1);

    let mut cycle_pos = 0.0;
    let mut f_cur = f0;
    for i in 0..len.min(buf.len().saturating_sub(start)) {
        let mut s = 0.0;
        for (&k, &ph) in harmonics.iter().zip(&phases) {
            s += (2.0 * PI * k as f64 * cycle_pos + ph).sin() / k as f64;
        }
        let env = if i < fade {
            0.5 - 0.5 * (PI * i as f64 / fade as f64).cos()
        } else if i >= len - fade {
            0.5 - 0.5 * (PI * (len - 1 - i) as f64 / fade as f64).cos()
        } else {
            1.0
        };
        buf[start + i] += p.amplitude * env * s / norm;
        cycle_pos += f_cur / sr;
        if cycle_pos >= 1.0 {
            cycle_pos -= 1.0;
            f_cur = f0 / (1.0 + jitter.sample(rng)).clamp(0.5, 1.5);
        }
    }
    Ok(())
}

/// One recording drawn from `p`.
pub fn synth_recording<R: Rng + ?Sized>(p: &ClassParams, sample_rate: u32, duration_s: f64, rng: &mut R) -> Result<Vec<f64>> {
    let sr = sample_rate as f64;
    let n = (duration_s * sr).round() as usize;
    let mut buf = vec![0.0; n];
    for (onset, len) in burst_layout(p, duration_s, rng)? {
        render_burst(&mut buf, (onset * sr).round() as usize, (len * sr).round() as usize, sr, p, rng)?;
    }
    if p.noise_floor > 0.0 {
        let noise = Normal::new(0.0, p.noise_floor).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        buf.iter_mut().for_each(|x| *x += noise.sample(rng));
    }
    Ok(buf)
}

/// Writes `<CLASS>_<nnn>.wav` files and `manifest.csv` into `out_dir` and
/// returns the manifest path. Each file has its own seed drawn in order from
/// a generator seeded with `seed`.
pub fn synth_corpus(spec: &SynthSpec, seed: u64, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = format!("{MANIFEST_HEADER}\n");
    for (label, params) in &spec.classes {
        for i in 0..params.count {
            let name = format!("{label}_{i:03}");
            let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
            let samples = synth_recording(params, spec.sample_rate, spec.duration_s, &mut rng)?;
            write_wav_pcm16(out_dir.join(format!("{name}.wav")), &samples, spec.sample_rate)?;
            let _ = writeln!(manifest, "{name}.wav,{label},{name}");
        }
    }
    let path = out_dir.join("manifest.csv");
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
