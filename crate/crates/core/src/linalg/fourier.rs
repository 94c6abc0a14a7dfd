//! Unitary DFT and the discrete ZAK transform `Z = F_M ⊗ I_K`.
//!
//! The FFT kernels come from `rustfft`; this module fixes the normalization
//! (`1/√N` in both directions) and the strided layout of the ZAK transform.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Multiplications charged for one `n`-point transform: `n·ld n`, with
/// `ld n` rounded up for sizes that are not powers of two.
pub fn dft_mult_charge(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    let ld = if n.is_power_of_two() {
        n.trailing_zeros() as u64
    } else {
        (n as f64).log2().ceil() as u64
    };
    n as u64 * ld
}

/// A planned unitary DFT of fixed length.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn process(&self, buf: &mut [C64], dir: Direction) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::dims(self.len, buf.len()));
        }
        match dir {
            Direction::Forward => self.fwd.process(buf),
            Direction::Inverse => self.inv.process(buf),
        }
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
        Ok(())
    }

    pub fn transform(&self, x: &[C64], dir: Direction) -> Result<Vec<C64>> {
        let mut buf = x.to_vec();
        self.process(&mut buf, dir)?;
        Ok(buf)
    }
}

/// Unitary DFT: `X[n] = (1/√N) Σ_m x[m] exp(∓j2πnm/N)`.
pub fn dft(x: &[C64], dir: Direction) -> Result<Vec<C64>> {
    DftPlan::new(x.len())?.transform(x, dir)
}

/// Discrete ZAK transform for signals of length `N = K·M`.
///
/// Output index `u·K + k` holds the unitary `M`-point DFT (bin `u`) of the
/// polyphase component `x[k], x[k+K], …, x[k+(M−1)K]`.
#[derive(Clone)]
pub struct ZakPlan {
    k: usize,
    m: usize,
    dft: DftPlan,
}

impl ZakPlan {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            k,
            m,
            dft: DftPlan::new(m)?,
        })
    }

    pub fn n(&self) -> usize {
        self.k * self.m
    }

    pub fn apply(&self, x: &[C64], dir: Direction) -> Result<Vec<C64>> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::dims(format!("length {n}"), format!("length {}", x.len())));
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        let mut column = vec![C64::new(0.0, 0.0); self.m];
        for k in 0..self.k {
            for (m, slot) in column.iter_mut().enumerate() {
                *slot = x[m * self.k + k];
            }
            self.dft.process(&mut column, dir)?;
            for (u, &v) in column.iter().enumerate() {
                out[u * self.k + k] = v;
            }
        }
        Ok(out)
    }

    pub fn forward(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.apply(x, Direction::Forward)
    }

    pub fn inverse(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.apply(x, Direction::Inverse)
    }

    /// Multiplications charged for one transform: `K` transforms of length `M`.
    pub fn mult_charge(&self) -> u64 {
        self.k as u64 * dft_mult_charge(self.m)
    }
}

pub fn zak_forward(x: &[C64], k: usize, m: usize) -> Result<Vec<C64>> {
    ZakPlan::new(k, m)?.forward(x)
}

pub fn zak_inverse(x: &[C64], k: usize, m: usize) -> Result<Vec<C64>> {
    ZakPlan::new(k, m)?.inverse(x)
}
