//! Waveform fractal dimension and permutation entropy.

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::signal::AudioSignal;

use super::mean_std;

/// Value returned when the fractal-dimension denominator collapses.
pub const FD_MAX: f64 = 10.0;
pub const FD_MIN_WINDOW: usize = 100;
pub const PE_MIN_ORDER: usize = 3;
pub const PE_MAX_ORDER: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct NldConfig {
    pub window_ms: f64,
    pub window_hop_ms: f64,
    /// Embedding orders `(short, long)`; the short order contributes windowed
    /// statistics, the long one windowed and whole-signal values.
    pub pe_orders: (usize, usize),
    pub pe_delay: usize,
    pub pe_normalized: bool,
}

impl Default for NldConfig {
    fn default() -> Self {
        Self {
            window_ms: 500.0,
            window_hop_ms: 250.0,
            pe_orders: (3, 5),
            pe_delay: 1,
            pe_normalized: true,
        }
    }
}

impl NldConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.pe_orders;
        for m in [a, b] {
            check_order(m)?;
        }
        if self.pe_delay == 0 {
            return Err(Error::InvalidParameter("pe_delay must be >= 1".into()));
        }
        if !(self.window_hop_ms > 0.0 && self.window_ms >= self.window_hop_ms) {
            return Err(Error::InvalidParameter("need window_ms >= window_hop_ms > 0".into()));
        }
        Ok(())
    }

    /// Smallest admissible window in samples.
    fn min_window(&self) -> usize {
        let m = self.pe_orders.0.max(self.pe_orders.1);
        (m * self.pe_delay + 1).max(FD_MIN_WINDOW)
    }
}

fn check_order(m: usize) -> Result<()> {
    if (PE_MIN_ORDER..=PE_MAX_ORDER).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "embedding order {m} outside [{PE_MIN_ORDER}, {PE_MAX_ORDER}]"
        )))
    }
}

/// Katz-style waveform dimension on amplitude increments:
/// `log10(n-1) / (log10(n-1) + log10(d/L))` with `L` the summed absolute
/// increments and `d` the largest excursion from the first sample.
pub fn castiglioni_fd(window: &[f64]) -> Result<f64> {
    let n = window.len();
    if n < 2 {
        return Err(Error::TooShort { got: n, need: 2 });
    }
    let length: f64 = window.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if length == 0.0 {
        return Ok(1.0);
    }
    let first = window[0];
    let extent = window.iter().fold(0.0f64, |m, y| m.max((y - first).abs()));
    let log_steps = ((n - 1) as f64).log10();
    let denom = log_steps + (extent / length).log10();
    if denom <= 1e-12 {
        return Ok(FD_MAX);
    }
    Ok((log_steps / denom).min(FD_MAX))
}

/// Lehmer index of the stable ascending argsort of `values`.
fn pattern_index(values: &[f64], order: &mut [usize]) -> usize {
    let m = values.len();
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    // insertion sort is stable and fastest for m <= 7
    for i in 1..m {
        let mut j = i;
        while j > 0 && values[order[j - 1]] > values[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut index = 0;
    for i in 0..m {
        let smaller = order[i + 1..].iter().filter(|&&o| o < order[i]).count();
        index = index * (m - i) + smaller;
    }
    index
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// Occurrence count of each ordinal pattern (indexed by Lehmer code) over
/// the `n - (m-1)*delay` embedding vectors.
pub fn ordinal_pattern_counts(window: &[f64], m: usize, delay: usize) -> Result<Vec<u64>> {
    check_order(m)?;
    if delay == 0 {
        return Err(Error::InvalidParameter("delay must be >= 1".into()));
    }
    let need = m * delay + 1;
    if window.len() < need {
        return Err(Error::TooShort {
            got: window.len(),
            need,
        });
    }
    let mut counts = vec![0u64; factorial(m)];
    let mut values = vec![0.0; m];
    let mut order = vec![0usize; m];
    for t in 0..window.len() - (m - 1) * delay {
        for (k, v) in values.iter_mut().enumerate() {
            *v = window[t + k * delay];
        }
        counts[pattern_index(&values, &mut order)] += 1;
    }
    Ok(counts)
}

/// Shannon entropy (nats) of ordinal-pattern frequencies, optionally divided
/// by `ln(m!)`. Ties rank by position, so constant runs form one pattern.
pub fn permutation_entropy(window: &[f64], m: usize, delay: usize, normalized: bool) -> Result<f64> {
    let counts = ordinal_pattern_counts(window, m, delay)?;
    let total: u64 = counts.iter().sum();
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum::<f64>();
    Ok(if normalized { h / (factorial(m) as f64).ln() } else { h })
}

/// Nonlinear block: CFD windowed mean/std/max/min and global, PE short-order
/// windowed mean/std, PE long-order windowed mean/std and global.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NldFeatureBlock {
    pub values: [f64; 10],
}

pub fn nld_block(signal: &AudioSignal, cfg: &NldConfig) -> Result<NldFeatureBlock> {
    nld_block_with(signal, cfg, Execution::default())
}

pub fn nld_block_with(signal: &AudioSignal, cfg: &NldConfig, exec: Execution) -> Result<NldFeatureBlock> {
    cfg.validate()?;
    let x = signal.samples();
    let len = signal.ms_to_samples(cfg.window_ms);
    let hop = signal.ms_to_samples(cfg.window_hop_ms).max(1);
    let need = len.max(cfg.min_window());
    if len < cfg.min_window() {
        return Err(Error::InvalidParameter(format!(
            "window of {len} samples is below the minimum of {}",
            cfg.min_window()
        )));
    }
    if x.len() < need {
        return Err(Error::TooShort { got: x.len(), need });
    }
    let (short, long) = cfg.pe_orders;
    let (tau, norm) = (cfg.pe_delay, cfg.pe_normalized);
    let count = (x.len() - len) / hop + 1;
    let per_window = par::map_range(exec, count, |i| -> Result<[f64; 3]> {
        let w = &x[i * hop..i * hop + len];
        Ok([
            castiglioni_fd(w)?,
            permutation_entropy(w, short, tau, norm)?,
            permutation_entropy(w, long, tau, norm)?,
        ])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let column = |j: usize| per_window.iter().map(|r| r[j]).collect::<Vec<_>>();
    let cfd = column(0);
    let (cfd_mean, cfd_std) = mean_std(&cfd);
    let cfd_max = cfd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cfd_min = cfd.iter().copied().fold(f64::INFINITY, f64::min);
    let (pe_s_mean, pe_s_std) = mean_std(&column(1));
    let (pe_l_mean, pe_l_std) = mean_std(&column(2));
    Ok(NldFeatureBlock {
        values: [
            cfd_mean,
            cfd_std,
            cfd_max,
            cfd_min,
            castiglioni_fd(x)?,
            pe_s_mean,
            pe_s_std,
            pe_l_mean,
            pe_l_std,
            permutation_entropy(x, long, tau, norm)?,
        ],
    })
}
