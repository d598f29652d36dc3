//! Two-class soft-margin SVM trained by sequential minimal optimization.
//!
//! The solver works on the dual with the two-threshold bookkeeping of
//! Keerthi et al.: `F_i = sum_j a_j y_j K_ij - y_i`, with `b_up` the smallest
//! `F` over indices that may move up and `b_low` the largest over indices
//! that may move down. Every example satisfies its KKT condition to within
//! `tol` once `b_low <= b_up + 2 tol`, and the bias is placed midway.
//! Examples are swept in a seeded random order; each violator is paired
//! with the extreme index on the opposite side.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match *self {
            Kernel::Linear => a.dot(&b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => f.write_str("linear"),
            Kernel::Rbf { gamma } => write!(f, "rbf({gamma})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: Kernel,
    pub kkt_tolerance: f64,
    /// Consecutive sweeps without any multiplier change before giving up.
    pub max_passes: usize,
    /// Z-score each feature with statistics of the training rows.
    pub standardize: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: Kernel::Linear,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            standardize: true,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidParameter(format!("rbf gamma must be positive, got {gamma}")));
            }
        }
        if !(self.kkt_tolerance > 0.0) || self.max_passes == 0 {
            return Err(Error::InvalidParameter("kkt_tolerance and max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Per-feature affine map applied before the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            means: vec![0.0; dim],
            scales: vec![1.0; dim],
        }
    }

    /// Column means and population standard deviations; a zero deviation
    /// becomes a unit scale.
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows() as f64;
        let (means, scales) = x
            .columns()
            .into_iter()
            .map(|col| {
                let m = col.sum() / n;
                let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
                (m, if sd > 0.0 { sd } else { 1.0 })
            })
            .unzip();
        Self { means, scales }
    }

    pub fn apply_row(&self, x: ArrayView1<'_, f64>) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.scales[j];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub alpha: f64,
    /// +1 or -1.
    pub y: f64,
    /// Standardized coordinates.
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub bias: f64,
    /// `class_names[0]` is the -1 class, `class_names[1]` the +1 class.
    pub class_names: [String; 2],
    pub standardizer: Standardizer,
    pub support: Vec<SupportVector>,
}

/// Outcome of one prediction: class index into `class_names` and the raw
/// decision value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub margin: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.standardizer.means.len()
    }

    /// `sum a_i y_i K(x_i, x) + b` on a raw (unstandardized) input.
    pub fn decision(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z = ndarray::Array1::from(self.standardizer.apply_row(x));
        Ok(self
            .support
            .iter()
            .map(|sv| sv.alpha * sv.y * self.kernel.eval(ArrayView1::from(&sv.x), z.view()))
            .sum::<f64>()
            + self.bias)
    }

    /// A zero decision value goes to the +1 class.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<Prediction> {
        let margin = self.decision(x)?;
        Ok(Prediction {
            class: usize::from(margin >= 0.0),
            margin,
        })
    }

    pub fn predict_label(&self, x: ArrayView1<'_, f64>) -> Result<(&str, f64)> {
        let p = self.predict(x)?;
        Ok((&self.class_names[p.class], p.margin))
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == label)
    }

    /// Line-oriented text form; numbers carry 12 significant digits.
    pub fn to_text(&self) -> String {
        let num = |v: f64| format!("{v:.11e}");
        let row = |xs: &[f64]| xs.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ");
        let mut out = String::from("svm-model 1\n");
        match self.kernel {
            Kernel::Linear => out.push_str("kernel linear\n"),
            Kernel::Rbf { gamma } => {
                let _ = writeln!(out, "kernel rbf {}", num(gamma));
            }
        }
        let _ = writeln!(out, "c {}", num(self.c));
        let _ = writeln!(out, "dimension {}", self.dim());
        let _ = writeln!(out, "classes {} {}", self.class_names[0], self.class_names[1]);
        let _ = writeln!(out, "bias {}", num(self.bias));
        let _ = writeln!(out, "means {}", row(&self.standardizer.means));
        let _ = writeln!(out, "scales {}", row(&self.standardizer.scales));
        let _ = writeln!(out, "support_vectors {}", self.support.len());
        for sv in &self.support {
            let _ = writeln!(out, "{} {} {}", num(sv.alpha), num(sv.y), row(&sv.x));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse::<SvmModel>().map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: path.display().to_string(),
                line,
                message,
            },
            other => other,
        })
    }
}

impl FromStr for SvmModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let err = |line: usize, message: String| Error::Parse {
            path: "<model>".into(),
            line,
            message,
        };
        let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (no, l) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` line")))?;
            let mut parts = l.split_whitespace();
            match parts.next() {
                Some(k) if k == key || key.is_empty() => {
                    let mut v: Vec<&str> = parts.collect();
                    if key.is_empty() {
                        v.insert(0, k);
                    }
                    Ok((no, v))
                }
                _ => Err(err(no, format!("expected `{key}`"))),
            }
        };
        let num = |no: usize, s: &str| s.parse::<f64>().map_err(|_| err(no, format!("bad number {s:?}")));
        let nums = |no: usize, v: &[&str]| v.iter().map(|s| num(no, s)).collect::<Result<Vec<f64>>>();

        let (no, v) = next("svm-model")?;
        if v != ["1"] {
            return Err(err(no, "unsupported model version".into()));
        }
        let (no, v) = next("kernel")?;
        let kernel = match v.as_slice() {
            ["linear"] => Kernel::Linear,
            ["rbf", g] => Kernel::Rbf { gamma: num(no, g)? },
            _ => return Err(err(no, "bad kernel line".into())),
        };
        let (no, v) = next("c")?;
        let c = num(no, v.first().copied().unwrap_or(""))?;
        let (no, v) = next("dimension")?;
        let dim: usize = v
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(no, "bad dimension".into()))?;
        let (no, v) = next("classes")?;
        let [neg, pos] = v.as_slice() else {
            return Err(err(no, "expected two class names".into()));
        };
        let class_names = [neg.to_string(), pos.to_string()];
        let (no, v) = next("bias")?;
        let bias = num(no, v.first().copied().unwrap_or(""))?;
        let (no, v) = next("means")?;
        let means = nums(no, &v)?;
        let (no2, v) = next("scales")?;
        let scales = nums(no2, &v)?;
        if means.len() != dim || scales.len() != dim {
            return Err(err(no, "standardization rows do not match dimension".into()));
        }
        let (no, v) = next("support_vectors")?;
        let count: usize = v
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(no, "bad support vector count".into()))?;
        let mut support = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, v) = next("")?;
            let vals = nums(no, &v)?;
            if vals.len() != dim + 2 {
                return Err(err(no, format!("expected {} values, got {}", dim + 2, vals.len())));
            }
            support.push(SupportVector {
                alpha: vals[0],
                y: vals[1],
                x: vals[2..].to_vec(),
            });
        }
        Ok(SvmModel {
            kernel,
            c,
            bias,
            class_names,
            standardizer: Standardizer { means, scales },
            support,
        })
    }
}

/// Full dual solution alongside the compact model.
#[derive(Debug, Clone)]
pub struct TrainedSvm {
    pub model: SvmModel,
    /// Multiplier of every training row, in input order.
    pub alphas: Vec<f64>,
    pub sweeps: usize,
    /// Whether the two-threshold optimality test was met.
    pub converged: bool,
}

/// Sorted distinct labels; exactly two are required.
pub(crate) fn binary_classes<S: AsRef<str>>(labels: &[S]) -> Result<[String; 2]> {
    let mut names: Vec<&str> = labels.iter().map(|l| l.as_ref()).collect();
    names.sort_unstable();
    names.dedup();
    match names.as_slice() {
        [a, b] => Ok([a.to_string(), b.to_string()]),
        _ => Err(Error::Degenerate(format!(
            "binary classifier needs exactly 2 classes, found {}",
            names.len()
        ))),
    }
}

pub fn train_smo<S: AsRef<str>>(x: ArrayView2<'_, f64>, labels: &[S], cfg: &SvmConfig, seed: u64) -> Result<SvmModel> {
    train_smo_full(x, labels, cfg, seed).map(|t| t.model)
}

pub fn train_smo_full<S: AsRef<str>>(
    x: ArrayView2<'_, f64>,
    labels: &[S],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<TrainedSvm> {
    cfg.validate()?;
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: labels.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("training matrix holds non-finite values".into()));
    }
    let class_names = binary_classes(labels)?;
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l.as_ref() == class_names[1] { 1.0 } else { -1.0 })
        .collect();
    let standardizer = if cfg.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(x.ncols())
    };
    let z = standardizer.apply(x);
    let n = z.nrows();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = cfg.kernel.eval(z.row(i), z.row(j));
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let sol = Smo::new(&gram, &y, cfg.c, cfg.kkt_tolerance).solve(cfg.max_passes, seed);
    let support = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| SupportVector {
            alpha: a,
            y: y[i],
            x: z.row(i).to_vec(),
        })
        .collect();
    Ok(TrainedSvm {
        model: SvmModel {
            kernel: cfg.kernel,
            c: cfg.c,
            bias: sol.bias,
            class_names,
            standardizer,
            support,
        },
        alphas: sol.alpha,
        sweeps: sol.sweeps,
        converged: sol.converged,
    })
}

/// Largest KKT residual of the training rows under `model`, given the full
/// multiplier vector: `max(0, 1 - y f)` at a = 0, `max(0, y f - 1)` at a = C,
/// `|y f - 1|` in between.
pub fn kkt_max_violation<S: AsRef<str>>(
    model: &SvmModel,
    alphas: &[f64],
    x: ArrayView2<'_, f64>,
    labels: &[S],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, row) in x.rows().into_iter().enumerate() {
        let y = if labels[i].as_ref() == model.class_names[1] { 1.0 } else { -1.0 };
        let yf = y * model.decision(row)?;
        let a = alphas[i];
        let v = if a <= 0.0 {
            (1.0 - yf).max(0.0)
        } else if a >= model.c {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

struct Solution {
    alpha: Vec<f64>,
    bias: f64,
    sweeps: usize,
    converged: bool,
}

struct Smo<'a> {
    gram: &'a [f64],
    y: &'a [f64],
    c: f64,
    tol: f64,
    n: usize,
    alpha: Vec<f64>,
    /// `sum_j a_j y_j K_ij - y_i`
    f: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(gram: &'a [f64], y: &'a [f64], c: f64, tol: f64) -> Self {
        let n = y.len();
        Self {
            gram,
            y,
            c,
            tol,
            n,
            alpha: vec![0.0; n],
            f: y.iter().map(|v| -v).collect(),
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    fn in_up(&self, i: usize) -> bool {
        let a = self.alpha[i];
        (self.y[i] > 0.0 && a < self.c) || (self.y[i] < 0.0 && a > 0.0)
    }

    fn in_low(&self, i: usize) -> bool {
        let a = self.alpha[i];
        (self.y[i] > 0.0 && a > 0.0) || (self.y[i] < 0.0 && a < self.c)
    }

    /// `(b_up, i_up, b_low, i_low)`
    fn thresholds(&self) -> (f64, usize, f64, usize) {
        let (mut b_up, mut i_up) = (f64::INFINITY, usize::MAX);
        let (mut b_low, mut i_low) = (f64::NEG_INFINITY, usize::MAX);
        for i in 0..self.n {
            if self.in_up(i) && self.f[i] < b_up {
                b_up = self.f[i];
                i_up = i;
            }
            if self.in_low(i) && self.f[i] > b_low {
                b_low = self.f[i];
                i_low = i;
            }
        }
        (b_up, i_up, b_low, i_low)
    }

    /// Pins values within rounding distance of a bound onto it, so that set
    /// membership in `in_up`/`in_low` is not decided by round-off.
    fn snap(&self, a: f64) -> f64 {
        let eps = 1e-12 * self.c;
        if a < eps {
            0.0
        } else if a > self.c - eps {
            self.c
        } else {
            a
        }
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (f1, f2) = (self.f[i1], self.f[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if hi - lo <= 1e-12 * self.c {
            return false;
        }
        let eta = self.k(i1, i1) + self.k(i2, i2) - 2.0 * self.k(i1, i2);
        // the dual objective along the constraint line has slope y2 (F1 - F2)
        let slope = y2 * (f1 - f2);
        let new_a2 = if eta > 1e-12 {
            (a2 + slope / eta).clamp(lo, hi)
        } else if slope > 0.0 {
            hi
        } else if slope < 0.0 {
            lo
        } else {
            a2
        };
        if (new_a2 - a2).abs() <= 1e-12 * (new_a2 + a2 + 1e-12) {
            return false;
        }
        let new_a2 = self.snap(new_a2);
        let new_a1 = self.snap((a1 + s * (a2 - new_a2)).clamp(0.0, self.c));
        let (d1, d2) = ((new_a1 - a1) * y1, (new_a2 - a2) * y2);
        for k in 0..self.n {
            self.f[k] += d1 * self.gram[i1 * self.n + k] + d2 * self.gram[i2 * self.n + k];
        }
        self.alpha[i1] = new_a1;
        self.alpha[i2] = new_a2;
        true
    }

    fn solve(mut self, max_passes: usize, seed: u64) -> Solution {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let step_cap = 200 * self.n * self.n + 10_000;
        let mut steps = 0usize;
        let mut idle = 0usize;
        let mut sweeps = 0usize;
        let mut converged = false;
        'outer: while idle < max_passes && steps < step_cap {
            sweeps += 1;
            let mut changed = false;
            for &i in &order {
                let (b_up, i_up, b_low, i_low) = self.thresholds();
                if b_low <= b_up + 2.0 * self.tol {
                    converged = true;
                    break 'outer;
                }
                let partner = if self.in_up(i) && self.f[i] < b_low - 2.0 * self.tol {
                    i_low
                } else if self.in_low(i) && self.f[i] > b_up + 2.0 * self.tol {
                    i_up
                } else {
                    continue;
                };
                if self.take_step(i, partner) {
                    changed = true;
                    steps += 1;
                }
            }
            idle = if changed { 0 } else { idle + 1 };
        }
        let (b_up, _, b_low, _) = self.thresholds();
        Solution {
            alpha: self.alpha,
            bias: -(b_up + b_low) / 2.0,
            sweeps,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn no_std(kernel: Kernel, c: f64) -> SvmConfig {
        SvmConfig {
            c,
            kernel,
            standardize: false,
            ..Default::default()
        }
    }

    #[test]
    fn two_point_max_margin() {
        let x = array![[-1.0], [1.0]];
        let t = train_smo_full(x.view(), &["neg", "pos"], &no_std(Kernel::Linear, 10.0), 0).unwrap();
        assert!(t.converged);
        let m = &t.model;
        assert!((m.decision(array![-1.0].view()).unwrap() + 1.0).abs() < 1e-3);
        assert!((m.decision(array![1.0].view()).unwrap() - 1.0).abs() < 1e-3);
        let p = m.predict(array![0.0].view()).unwrap();
        assert!(p.margin.abs() < 1e-3);
        assert!((t.alphas[0] - 0.5).abs() < 1e-9 && (t.alphas[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_margin_goes_positive() {
        let m = SvmModel {
            kernel: Kernel::Linear,
            c: 1.0,
            bias: 0.0,
            class_names: ["a".into(), "b".into()],
            standardizer: Standardizer::identity(1),
            support: vec![SupportVector {
                alpha: 1.0,
                y: 1.0,
                x: vec![1.0],
            }],
        };
        assert_eq!(m.predict_label(array![0.0].view()).unwrap(), ("b", 0.0));
    }

    #[test]
    fn xor_with_rbf() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let labels = ["m", "m", "p", "p"];
        let m = train_smo(x.view(), &labels, &no_std(Kernel::Rbf { gamma: 1.0 }, 10.0), 3).unwrap();
        for (row, l) in x.rows().into_iter().zip(labels) {
            assert_eq!(m.predict_label(row).unwrap().0, l);
        }
    }

    #[test]
    fn identical_rows_predict_majority() {
        let x = Array2::<f64>::ones((5, 3));
        let labels = ["a", "b", "b", "b", "a"];
        let m = train_smo(x.view(), &labels, &SvmConfig::default(), 1).unwrap();
        assert_eq!(m.predict_label(x.row(0)).unwrap().0, "b");
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[0.0], [1.0]];
        let cfg = SvmConfig::default();
        assert!(matches!(train_smo(x.view(), &["a", "a"], &cfg, 0), Err(Error::Degenerate(_))));
        assert!(train_smo(x.view(), &["a"], &cfg, 0).is_err());
        let m = train_smo(x.view(), &["a", "b"], &cfg, 0).unwrap();
        assert!(matches!(
            m.predict(array![1.0, 2.0].view()),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        let bad = SvmConfig { c: 0.0, ..cfg };
        assert!(train_smo(x.view(), &["a", "b"], &bad, 0).is_err());
    }

    #[test]
    fn text_round_trip_is_stable() {
        let x = array![[0.0, 2.0], [1.0, 1.5], [3.0, 0.1], [2.5, -1.0]];
        let cfg = SvmConfig {
            kernel: Kernel::Rbf { gamma: 0.3 },
            ..Default::default()
        };
        let m = train_smo(x.view(), &["u", "u", "v", "v"], &cfg, 5).unwrap();
        let text = m.to_text();
        let back: SvmModel = text.parse().unwrap();
        assert_eq!(back.to_text(), text);
        let again: SvmModel = back.to_text().parse().unwrap();
        for row in x.rows() {
            let a = back.decision(row).unwrap();
            assert_eq!(a.to_bits(), again.decision(row).unwrap().to_bits());
            assert!((a - m.decision(row).unwrap()).abs() < 1e-9);
        }
        assert!("svm-model 2\n".parse::<SvmModel>().is_err());
    }
}
