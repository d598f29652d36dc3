//! Measurements behind the SVM, selection and cross-validation criteria,
//! shared by the per-area tests and the acceptance suite.

use std::time::Instant;

use cvf_core::classify::{cross_validate, kkt_max_violation, train_smo_full, SvmConfig};
use cvf_core::stats::select_features;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::oracle::{blobs, random_dataset};

pub fn check_kkt(seed: u64) -> (f64, f64) {
    let (x, labels, cfg) = random_dataset(seed);
    let t = train_smo_full(x.view(), &labels, &cfg, seed).unwrap();
    let kkt = kkt_max_violation(&t.model, &t.alphas, x.view(), &labels).unwrap();
    let y: Vec<f64> = labels.iter().map(|&l| if l == "MCI" { 1.0 } else { -1.0 }).collect();
    let balance: f64 = t.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
    for &a in &t.alphas {
        assert!((0.0..=cfg.c + 1e-9).contains(&a), "seed {seed}: alpha {a}");
    }
    assert!(t.converged, "seed {seed} hit the step cap");
    (kkt, balance.abs())
}

pub fn time_large_training() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let labels: Vec<&str> = (0..100).map(|i| if i < 50 { "CR" } else { "MCI" }).collect();
    let x = Array2::from_shape_fn((100, 80), |(i, j)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * (1.0 + j as f64) + if i < 50 { 0.0 } else { 0.3 * (j % 5) as f64 }
    });
    let start = Instant::now();
    let t = train_smo_full(x.view(), &labels, &SvmConfig::default(), 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(kkt_max_violation(&t.model, &t.alphas, x.view(), &labels).unwrap() <= 1e-3);
    secs
}

/// Per replicate: 40+40 rows, one column with group means 0 and 1
/// (sd 0.5) and ten pure-noise columns.
pub fn noise_retention(replicates: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = Normal::new(0.0, 0.5).unwrap();
    let labels: Vec<&str> = (0..80).map(|i| if i < 40 { "CR" } else { "MCI" }).collect();
    let (mut kept, mut trials, mut signal_hits) = (0usize, 0usize, 0usize);
    for _ in 0..replicates {
        let mut x = Array2::<f64>::zeros((80, 11));
        for i in 0..80 {
            x[[i, 0]] = if i < 40 { 0.0 } else { 1.0 } + sd.sample(&mut rng);
            for j in 1..11 {
                x[[i, j]] = sd.sample(&mut rng);
            }
        }
        let sel = select_features(x.view(), &labels, 0.05).unwrap();
        signal_hits += usize::from(sel.is_retained(0));
        kept += (1..11).filter(|&j| sel.is_retained(j)).count();
        trials += 10;
    }
    (kept as f64 / trials as f64, signal_hits)
}

pub fn separable_cer() -> f64 {
    let (x, labels) = blobs(50, 4, 10.0, 5);
    cross_validate(x.view(), &labels, 10, &SvmConfig::default(), 0).unwrap().cer_global
}

/// Mean accuracy over 20 label shuffles of weakly informative data.
pub fn shuffled_accuracy() -> f64 {
    let (x, labels) = blobs(50, 6, 0.0, 9);
    let mut total = 0.0;
    for seed in 0..20 {
        let mut l = labels.clone();
        l.shuffle(&mut ChaCha8Rng::seed_from_u64(1000 + seed));
        total += cross_validate(x.view(), &l, 10, &SvmConfig::default(), seed).unwrap().accuracy;
    }
    total / 20.0
}

