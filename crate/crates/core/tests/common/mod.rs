#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use std::f64::consts::PI;

use cvf_core::AudioSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const SR: u32 = 16_000;

pub fn tone(freq: f64, amp: f64, secs: f64) -> Vec<f64> {
    let n = (secs * SR as f64).round() as usize;
    (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / SR as f64).sin()).collect()
}

pub fn silence(secs: f64) -> Vec<f64> {
    vec![0.0; (secs * SR as f64).round() as usize]
}

/// Band-limited-free sawtooth in [-amp, amp].
pub fn sawtooth(freq: f64, amp: f64, secs: f64) -> Vec<f64> {
    let n = (secs * SR as f64).round() as usize;
    (0..n)
        .map(|i| {
            let ph = (freq * i as f64 / SR as f64).fract();
            amp * (2.0 * ph - 1.0)
        })
        .collect()
}

pub fn uniform_noise(n: usize, amp: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-amp..amp)).collect()
}

pub fn gaussian_noise(n: usize, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}

pub fn concat(parts: &[Vec<f64>]) -> Vec<f64> {
    parts.concat()
}

pub fn signal(samples: Vec<f64>) -> AudioSignal {
    AudioSignal::new(samples, SR, "test").unwrap()
}
