#![allow(dead_code)]

use esp_core::ParticleSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` particles with alternating unit charges at uniform positions in a cube.
pub fn random_system(n: usize, l: f64, seed: u64) -> ParticleSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| {
            [
                rng.random::<f64>() * l,
                rng.random::<f64>() * l,
                rng.random::<f64>() * l,
            ]
        })
        .collect();
    let charges = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    ParticleSystem::new(positions, charges, [l; 3]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Values with their mean removed (potentials are defined up to a constant).
pub fn centred(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

/// `sqrt(sum |a - b|^2 / sum |b|^2)` over flat values.
pub fn relative_rms(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn flatten(f: &[[f64; 3]]) -> Vec<f64> {
    f.iter().flatten().copied().collect()
}
