//! `key = value` configuration files layered over built-in defaults.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::classify::{Kernel, SvmConfig};
use crate::error::{Error, Result};
use crate::features::NldConfig;
use crate::vad::VadConfig;

/// One `key = value` line with its 1-based line number. Blank lines and
/// lines starting with `#` are skipped.
pub(crate) fn key_values(text: &str, origin: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            });
        };
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_value<T: FromStr>(origin: &str, line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        path: origin.to_string(),
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub vad: VadConfig,
    pub nld: NldConfig,
    pub svm: SvmConfig,
    pub alpha: f64,
    pub k: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            vad: VadConfig::default(),
            nld: NldConfig::default(),
            svm: SvmConfig::default(),
            alpha: 0.05,
            k: 10,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.vad.validate()?;
        self.nld.validate()?;
        self.svm.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("k must be at least 2, got {}", self.k)));
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Overrides the keys present in `text`; unknown keys are errors.
    pub fn apply(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut gamma = None;
        let mut kernel = None;
        for (line, key, value) in key_values(text, origin)? {
            macro_rules! set {
                ($field:expr) => {
                    $field = parse_value(origin, line, &key, &value)?
                };
            }
            match key.as_str() {
                "vad.frame_ms" => set!(self.vad.frame_ms),
                "vad.hop_ms" => set!(self.vad.hop_ms),
                "vad.energy_floor_ratio" => set!(self.vad.energy_floor_ratio),
                "vad.voicing_autocorr_min" => set!(self.vad.voicing_autocorr_min),
                "vad.min_segment_ms" => set!(self.vad.min_segment_ms),
                "vad.hangover_frames" => set!(self.vad.hangover_frames),
                "nld.window_ms" => set!(self.nld.window_ms),
                "nld.window_hop_ms" => set!(self.nld.window_hop_ms),
                "nld.pe_order_short" => set!(self.nld.pe_orders.0),
                "nld.pe_order_long" => set!(self.nld.pe_orders.1),
                "nld.pe_delay" => set!(self.nld.pe_delay),
                "nld.pe_normalized" => set!(self.nld.pe_normalized),
                "svm.c" => set!(self.svm.c),
                "svm.kernel" => match value.as_str() {
                    "linear" | "rbf" => kernel = Some((line, value.clone())),
                    _ => {
                        return Err(Error::Parse {
                            path: origin.to_string(),
                            line,
                            message: format!("svm.kernel must be linear or rbf, got {value:?}"),
                        })
                    }
                },
                "svm.gamma" => gamma = Some(parse_value::<f64>(origin, line, &key, &value)?),
                "svm.kkt_tolerance" => set!(self.svm.kkt_tolerance),
                "svm.max_passes" => set!(self.svm.max_passes),
                "svm.standardize" => set!(self.svm.standardize),
                "select.alpha" => set!(self.alpha),
                "eval.k" => set!(self.k),
                "eval.seed" => set!(self.seed),
                _ => {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        line,
                        message: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        let current_gamma = match self.svm.kernel {
            Kernel::Rbf { gamma } => gamma,
            Kernel::Linear => DEFAULT_GAMMA,
        };
        let is_rbf = match &kernel {
            Some((_, k)) => k == "rbf",
            None => matches!(self.svm.kernel, Kernel::Rbf { .. }),
        };
        self.svm.kernel = if is_rbf {
            Kernel::Rbf {
                gamma: gamma.unwrap_or(current_gamma),
            }
        } else {
            Kernel::Linear
        };
        self.validate()
    }

    /// Every key with its current value, in the form `apply` accepts.
    pub fn to_text(&self) -> String {
        let (kernel, gamma) = match self.svm.kernel {
            Kernel::Linear => ("linear", DEFAULT_GAMMA),
            Kernel::Rbf { gamma } => ("rbf", gamma),
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("vad.frame_ms", &self.vad.frame_ms);
        kv("vad.hop_ms", &self.vad.hop_ms);
        kv("vad.energy_floor_ratio", &self.vad.energy_floor_ratio);
        kv("vad.voicing_autocorr_min", &self.vad.voicing_autocorr_min);
        kv("vad.min_segment_ms", &self.vad.min_segment_ms);
        kv("vad.hangover_frames", &self.vad.hangover_frames);
        kv("nld.window_ms", &self.nld.window_ms);
        kv("nld.window_hop_ms", &self.nld.window_hop_ms);
        kv("nld.pe_order_short", &self.nld.pe_orders.0);
        kv("nld.pe_order_long", &self.nld.pe_orders.1);
        kv("nld.pe_delay", &self.nld.pe_delay);
        kv("nld.pe_normalized", &self.nld.pe_normalized);
        kv("svm.c", &self.svm.c);
        kv("svm.kernel", &kernel);
        kv("svm.gamma", &gamma);
        kv("svm.kkt_tolerance", &self.svm.kkt_tolerance);
        kv("svm.max_passes", &self.svm.max_passes);
        kv("svm.standardize", &self.svm.standardize);
        kv("select.alpha", &self.alpha);
        kv("eval.k", &self.k);
        kv("eval.seed", &self.seed);
        s
    }
}

/// Used when the rbf kernel is chosen without an explicit gamma.
pub const DEFAULT_GAMMA: f64 = 0.01;
