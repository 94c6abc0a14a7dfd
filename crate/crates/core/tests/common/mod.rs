#![allow(dead_code)]

use gfdm_lmmse::{CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cvec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn cmat(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_row_major(rows, cols, cvec(rng, rows * cols)).unwrap()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// O(N²) unitary DFT by direct summation.
pub fn naive_dft(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| v * C64::from_polar(s, sign * 2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64))
                .sum()
        })
        .collect()
}
