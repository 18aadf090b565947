#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use senc_core::Vec3;

pub const FD_STEP: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn jitter(x: &[Vec3], amount: f64, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    x.iter()
        .map(|p| p + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amount)
        .collect()
}

/// Central differences of `f` at `x` along every coordinate.
pub fn fd_gradient(x: &[Vec3], step: f64, f: impl Fn(&[Vec3]) -> f64) -> Vec<Vec3> {
    let mut y = x.to_vec();
    let mut g = vec![Vec3::zeros(); x.len()];
    for i in 0..x.len() {
        for k in 0..3 {
            let orig = y[i][k];
            y[i][k] = orig + step;
            let fp = f(&y);
            y[i][k] = orig - step;
            let fm = f(&y);
            y[i][k] = orig;
            g[i][k] = (fp - fm) / (2.0 * step);
        }
    }
    g
}

/// Max coordinate difference over the largest gradient coordinate, with a
/// floor so that near-zero gradients compare absolutely.
pub fn relative_error(analytic: &[Vec3], numeric: &[Vec3], floor: f64) -> f64 {
    let scale = analytic
        .iter()
        .chain(numeric)
        .map(|g| g.amax())
        .fold(floor, f64::max);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max)
        / scale
}
