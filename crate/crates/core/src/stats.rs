//! One-way ANOVA with exact F-distribution p-values, and significance-level
//! feature selection.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: u32, d2: u32) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (a, b) = (d1 as f64, d2 as f64);
    regularized_incomplete_beta(a * x / (a * x + b), a / 2.0, b / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaResult {
    /// `+inf` when the groups are perfectly separated.
    pub f: f64,
    pub p: f64,
    pub d1: u32,
    pub d2: u32,
    pub group_means: Vec<f64>,
    pub grand_mean: f64,
}

/// Between/within sum-of-squares F test across two or more groups.
pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 groups, got {}", groups.len())));
    }
    let mut n_total = 0usize;
    for (g, group) in groups.iter().enumerate() {
        let group = group.as_ref();
        if group.len() < 2 {
            return Err(Error::Degenerate(format!(
                "group {g} has {} observation(s), need at least 2",
                group.len()
            )));
        }
        if group.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("group {g} holds a non-finite value")));
        }
        n_total += group.len();
    }
    let k = groups.len();
    let d1 = (k - 1) as u32;
    let d2 = (n_total - k) as u32;
    let grand_mean = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n_total as f64;
    let group_means: Vec<f64> = groups
        .iter()
        .map(|g| g.as_ref().iter().sum::<f64>() / g.as_ref().len() as f64)
        .collect();
    let all_equal = {
        let first = groups[0].as_ref()[0];
        groups.iter().all(|g| g.as_ref().iter().all(|&v| v == first))
    };
    if all_equal {
        return Ok(AnovaResult {
            f: 0.0,
            p: 1.0,
            d1,
            d2,
            group_means,
            grand_mean,
        });
    }
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for (g, m) in groups.iter().zip(&group_means) {
        let g = g.as_ref();
        ssb += g.len() as f64 * (m - grand_mean).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let total = ssb + ssw;
    let (f, p) = if ssw <= 1e-14 * total {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssb / d1 as f64) / (ssw / d2 as f64);
        (f, (1.0 - f_cdf(f, d1, d2)).clamp(0.0, 1.0))
    };
    Ok(AnovaResult {
        f,
        p,
        d1,
        d2,
        group_means,
        grand_mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTest {
    pub feature: usize,
    pub anova: AnovaResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub alpha: f64,
    /// One test per column, in column order.
    pub tests: Vec<FeatureTest>,
    /// Columns with `p < alpha`, by ascending p then column index.
    pub retained: Vec<usize>,
}

impl SelectionResult {
    pub fn is_retained(&self, feature: usize) -> bool {
        self.retained.contains(&feature)
    }

    /// Column indices of every test sorted by ascending p then index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.tests.len()).collect();
        idx.sort_by(|&a, &b| {
            self.tests[a]
                .anova
                .p
                .total_cmp(&self.tests[b].anova.p)
                .then(a.cmp(&b))
        });
        idx
    }

    /// `feature_name<TAB>F<TAB>p<TAB>retained`, sorted by p. `names` maps a
    /// column index to its display name.
    pub fn to_table(&self, names: &[&str]) -> String {
        let mut out = String::from("feature\tF\tp\tretained\n");
        for i in self.ranked() {
            let t = &self.tests[i];
            let name = names.get(t.feature).copied().unwrap_or("?");
            let _ = writeln!(
                out,
                "{name}\t{:.6}\t{:.6e}\t{}",
                t.anova.f,
                t.anova.p,
                self.is_retained(t.feature)
            );
        }
        out
    }
}

/// Row indices per class, classes in sorted order.
pub(crate) fn group_rows<S: AsRef<str>>(labels: &[S]) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    groups
}

pub fn select_features<S: AsRef<str> + Sync>(
    matrix: ArrayView2<'_, f64>,
    labels: &[S],
    alpha: f64,
) -> Result<SelectionResult> {
    select_features_with(matrix, labels, alpha, Execution::default())
}

pub fn select_features_with<S: AsRef<str> + Sync>(
    matrix: ArrayView2<'_, f64>,
    labels: &[S],
    alpha: f64,
    exec: Execution,
) -> Result<SelectionResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if labels.len() != matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            got: labels.len(),
        });
    }
    let groups: Vec<Vec<usize>> = group_rows(labels).into_values().collect();
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::Degenerate(
            "selection needs at least 2 classes with at least 2 rows each".into(),
        ));
    }
    let tests = par::map_range(exec, matrix.ncols(), |j| {
        let col = matrix.column(j);
        let samples: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&i| col[i]).collect()).collect();
        anova_oneway(&samples).map(|anova| FeatureTest { feature: j, anova })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut result = SelectionResult {
        alpha,
        tests,
        retained: Vec::new(),
    };
    result.retained = result
        .ranked()
        .into_iter()
        .filter(|&i| result.tests[i].anova.p < alpha)
        .collect();
    Ok(result)
}
