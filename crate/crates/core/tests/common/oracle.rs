//! Independent reference implementations and data generators shared by the
//! integration tests and the acceptance suite.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cvf_core::classify::{Kernel, SvmConfig};

use super::{gaussian_noise, tone, SR};

/// CFD straight from the formula, no shortcuts.
pub fn brute_cfd(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mut l = 0.0;
    for i in 1..w.len() {
        l += (w[i] - w[i - 1]).abs();
    }
    if l == 0.0 {
        return 1.0;
    }
    let mut d: f64 = 0.0;
    for &y in w {
        d = d.max((y - w[0]).abs());
    }
    let den = (n - 1.0).log10() + (d / l).log10();
    if den <= 1e-12 {
        10.0
    } else {
        ((n - 1.0).log10() / den).min(10.0)
    }
}

pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..m {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// PE by matching each embedding vector's stable argsort against an explicit
/// list of all m! permutations.
pub fn brute_pe(w: &[f64], m: usize, tau: usize) -> f64 {
    let perms = permutations(m);
    let mut counts = vec![0usize; perms.len()];
    let total = w.len() - (m - 1) * tau;
    for t in 0..total {
        let v: Vec<f64> = (0..m).map(|k| w[t + k * tau]).collect();
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(a.cmp(&b)));
        let slot = perms.iter().position(|p| *p == idx).unwrap();
        counts[slot] += 1;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    h / (perms.len() as f64).ln()
}

pub fn ln_gamma_ref(x: f64) -> f64 {
    // Stirling series with upward recursion; independent of the crate's
    // Lanczos implementation
    let mut shift = 0.0;
    let mut z = x;
    while z < 20.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    shift + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + inv / 12.0 - inv.powi(3) / 360.0
        + inv.powi(5) / 1260.0
        - inv.powi(7) / 1680.0
}

/// F density integrated with composite Simpson on t = x^(1/k) substitution,
/// which removes the x^(d1/2 - 1) singularity at zero.
pub fn f_cdf_by_quadrature(x: f64, d1: u32, d2: u32) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let log_norm = ln_gamma_ref((a + b) / 2.0) - ln_gamma_ref(a / 2.0) - ln_gamma_ref(b / 2.0) + (a / 2.0) * (a / b).ln();
    let density = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        (log_norm + (a / 2.0 - 1.0) * u.ln() - ((a + b) / 2.0) * (1.0 + a * u / b).ln()).exp()
    };
    let k = 2.0;
    let g = |t: f64| {
        if t <= 0.0 {
            // limit of density(t^k) k t^(k-1) at 0
            return if d1 == 2 { 0.0 } else if d1 == 1 { (log_norm).exp() * k } else { 0.0 };
        }
        density(t.powf(k)) * k * t.powf(k - 1.0)
    };
    let upper = x.powf(1.0 / k);
    let n = 20_000;
    let h = upper / n as f64;
    let mut s = g(0.0) + g(upper);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Overlapping Gaussian classes, so most datasets have bounded multipliers.
pub fn random_dataset(seed: u64) -> (Array2<f64>, Vec<&'static str>, SvmConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..70);
    let d = rng.random_range(2..9);
    let shift: f64 = rng.random_range(0.0..3.0);
    let mut labels = Vec::with_capacity(n);
    let x = Array2::from_shape_fn((n, d), |(i, j)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        if j == 0 {
            labels.push(if i % 2 == 0 { "CR" } else { "MCI" });
        }
        z + if i % 2 == 0 { 0.0 } else { shift / (j + 1) as f64 }
    });
    let kernel = if seed.is_multiple_of(2) {
        Kernel::Linear
    } else {
        Kernel::Rbf { gamma: 1.0 / d as f64 }
    };
    let c = [0.1, 1.0, 10.0][seed as usize % 3];
    (x, labels, SvmConfig { c, kernel, ..SvmConfig::default() })
}

pub fn blobs(n_per: usize, dim: usize, gap: f64, seed: u64) -> (Array2<f64>, Vec<&'static str>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<&str> = (0..2 * n_per).map(|i| if i % 2 == 0 { "CR" } else { "MCI" }).collect();
    let x = Array2::from_shape_fn((2 * n_per, dim), |(i, _)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z + if i % 2 == 0 { 0.0 } else { gap / (dim as f64).sqrt() }
    });
    (x, labels)
}


/// Twenty tone-plus-noise windows of varied length; every third one is
/// quantized so that ordinal ties occur.
pub fn seeded_windows() -> Vec<Vec<f64>> {
    (0..20u64)
        .map(|s| {
            let n = 200 + 37 * s as usize;
            let noise = gaussian_noise(n, 0.2, 100 + s);
            let t = tone(90.0 + 13.0 * s as f64, 0.3, n as f64 / SR as f64);
            noise
                .iter()
                .zip(&t)
                .map(|(a, b)| if s % 3 == 0 { ((a + b) * 64.0).round() / 64.0 } else { a + b })
                .collect()
        })
        .collect()
}

