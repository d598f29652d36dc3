//! Error rates, coverage of cases and normal-approximation intervals.

use std::fmt;

use super::svm::Prediction;
use crate::error::{Error, Result};

pub const COVERAGE_LEVEL: f64 = 0.95;
pub const CI_LEVELS: [f64; 3] = [0.95, 0.90, 0.80];

fn z_for(level: f64) -> Option<f64> {
    [(0.95, 1.960), (0.90, 1.645), (0.80, 1.282)]
        .into_iter()
        .find(|(l, _)| (l - level).abs() < 1e-9)
        .map(|(_, z)| z)
}

/// `p ± z sqrt(p(1-p)/n)` clipped to [0, 1].
pub fn confidence_interval(p_hat: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    let z = z_for(level)
        .ok_or_else(|| Error::InvalidParameter(format!("confidence level {level} not in {{0.95, 0.90, 0.80}}")))?;
    if !(0.0..=1.0).contains(&p_hat) || n == 0 {
        return Err(Error::InvalidParameter(format!("need 0 <= p <= 1 and n >= 1, got p={p_hat} n={n}")));
    }
    let half = z * (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    Ok(((p_hat - half).max(0.0), (p_hat + half).min(1.0)))
}

/// Confidence assigned to the +1 class for a decision value.
pub fn margin_confidence(margin: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * margin).exp())
}

/// Whether `truth` lies in the smallest class set whose summed confidence
/// reaches `level`.
pub fn covered(margin: f64, truth: usize, level: f64) -> bool {
    let p_pos = margin_confidence(margin);
    let conf = [1.0 - p_pos, p_pos];
    let top = usize::from(conf[1] >= conf[0]);
    truth == top || conf[top] < level
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub level: f64,
    /// Percent.
    pub lo: f64,
    /// Percent.
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k: usize,
    pub seed: u64,
    pub feature_set: String,
    pub class_names: [String; 2],
    /// Rows are true classes, columns predicted.
    pub confusion: [[u64; 2]; 2],
    pub cer_per_class: [f64; 2],
    pub cer_global: f64,
    pub accuracy: f64,
    pub coverage: f64,
    pub intervals: [Interval; 3],
}

impl EvalReport {
    /// Builds the report from true class indices and per-row predictions.
    pub fn from_predictions(
        class_names: [String; 2],
        truth: &[usize],
        predictions: &[Prediction],
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        if truth.len() != predictions.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: predictions.len(),
            });
        }
        if truth.is_empty() {
            return Err(Error::Degenerate("no predictions to evaluate".into()));
        }
        let mut confusion = [[0u64; 2]; 2];
        let mut hits = 0usize;
        for (&t, p) in truth.iter().zip(predictions) {
            confusion[t][p.class] += 1;
            hits += usize::from(covered(p.margin, t, COVERAGE_LEVEL));
        }
        let n = truth.len();
        let rate = |err: u64, tot: u64| if tot == 0 { 0.0 } else { 100.0 * err as f64 / tot as f64 };
        let cer_per_class = [
            rate(confusion[0][1], confusion[0][0] + confusion[0][1]),
            rate(confusion[1][0], confusion[1][0] + confusion[1][1]),
        ];
        let errors = confusion[0][1] + confusion[1][0];
        let cer_global = rate(errors, n as u64);
        let accuracy = 100.0 - cer_global;
        let p = (confusion[0][0] + confusion[1][1]) as f64 / n as f64;
        let intervals = CI_LEVELS.map(|level| {
            let (lo, hi) = confidence_interval(p, n, level).expect("valid level and proportion");
            Interval {
                level,
                lo: 100.0 * lo,
                hi: 100.0 * hi,
            }
        });
        Ok(Self {
            k,
            seed,
            feature_set: String::new(),
            class_names,
            confusion,
            cer_per_class,
            cer_global,
            accuracy,
            coverage: 100.0 * hits as f64 / n as f64,
            intervals,
        })
    }

    pub fn n(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [c0, c1] = &self.class_names;
        let w = c0.len().max(c1.len()).max(10);
        writeln!(f, "feature set: {}   k = {}   seed = {}   n = {}", self.feature_set, self.k, self.seed, self.n())?;
        writeln!(f, "confusion (rows true, columns predicted):")?;
        writeln!(f, "  {:>w$} {:>8} {:>8}", "", c0, c1)?;
        for (i, name) in self.class_names.iter().enumerate() {
            writeln!(f, "  {:>w$} {:>8} {:>8}", name, self.confusion[i][0], self.confusion[i][1])?;
        }
        writeln!(f, "CER {c0}: {:.2}%   CER {c1}: {:.2}%", self.cer_per_class[0], self.cer_per_class[1])?;
        writeln!(f, "CER global: {:.2}%   accuracy: {:.2}%", self.cer_global, self.accuracy)?;
        writeln!(f, "coverage of cases (0.95, logistic-margin approximation): {:.2}%", self.coverage)?;
        for iv in &self.intervals {
            writeln!(f, "accuracy CI {:.0}%: [{:.2}, {:.2}]", 100.0 * iv.level, iv.lo, iv.hi)?;
        }
        Ok(())
    }
}
