use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

/// Algorithm stage a multiplication is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    /// (a) `F_N·G_s` from the precomputed `F_N·A_s` and the channel diagonal.
    FreqGs,
    /// (b) the cyclic tridiagonal Gram blocks.
    Tridiagonal,
    /// (c) the cyclic tridiagonal solves.
    Solve,
    /// (d) `Zᴴ·D_W`.
    ZakRecon,
    /// Right-hand sides `D_{G,u}` (not part of the closed-form count).
    Dgu,
    /// Dense reference: Cholesky factorization.
    Cholesky,
    /// Dense reference: forward and backward substitution.
    Substitution,
}

impl Stage {
    pub const FAST: [Stage; 5] = [
        Stage::FreqGs,
        Stage::Tridiagonal,
        Stage::Solve,
        Stage::ZakRecon,
        Stage::Dgu,
    ];
    pub const DIRECT: [Stage; 2] = [Stage::Cholesky, Stage::Substitution];
    pub const ALL: [Stage; 7] = [
        Stage::FreqGs,
        Stage::Tridiagonal,
        Stage::Solve,
        Stage::ZakRecon,
        Stage::Dgu,
        Stage::Cholesky,
        Stage::Substitution,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Stage::FreqGs => "(a) freqGs",
            Stage::Tridiagonal => "(b) tridiagonal",
            Stage::Solve => "(c) solve",
            Stage::ZakRecon => "(d) zakRecon",
            Stage::Dgu => "dgu",
            Stage::Cholesky => "cholesky",
            Stage::Substitution => "substitution",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-stage tally of complex multiplications.
///
/// Counters are atomic so per-block work may run concurrently.
#[derive(Debug, Default)]
pub struct OpCounter {
    counts: [AtomicU64; 7],
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, stage: Stage, n: u64) {
        self.counts[stage.index()].fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self, stage: Stage) -> u64 {
        self.counts[stage.index()].load(Ordering::Relaxed)
    }

    pub fn fast_total(&self) -> u64 {
        Stage::FAST.iter().map(|&s| self.get(s)).sum()
    }

    pub fn direct_total(&self) -> u64 {
        Stage::DIRECT.iter().map(|&s| self.get(s)).sum()
    }

    pub fn reset(&self) {
        for c in &self.counts {
            c.store(0, Ordering::Relaxed);
        }
    }
}
