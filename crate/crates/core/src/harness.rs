//! End-to-end drivers behind the CLI subcommands: oracle verification,
//! instrumented benchmarking and a transmit/receive simulation.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::complexity::formulas::{c_sparse, ld};
use crate::complexity::{OpCounter, Stage};
use crate::equalizer::fast::{build_tridiagonal, compute_eigen_blocks, compute_freq_gs, equalize_zak_blocks};
use crate::equalizer::{compute_fast_filter, equalize_direct, lmmse_direct, precompute_freq_as};
use crate::error::Result;
use crate::gfdm::{
    draw_noise_with, draw_symbols_with, modulate, modulation_matrix, modulation_matrix_dense, Channel, Constellation,
    GfdmParams, PrototypeFilter,
};
use crate::linalg::fourier::dft_mult_charge;
use crate::linalg::CMat;
use crate::{oracle, C64};

pub const TOL_FILTER: f64 = 1e-9;
pub const TOL_SOLVE: f64 = 1e-10;
pub const TOL_EQUALIZER: f64 = 1e-10;
pub const TOL_STRUCTURE: f64 = 1e-12;
pub const TOL_RECONSTRUCT: f64 = 1e-12;

/// One system instance: prototype, channel and noise level.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub sigma_n2: f64,
    pub channel_len: usize,
    pub seed: u64,
}

impl SystemConfig {
    pub fn build(&self) -> Result<(GfdmParams, PrototypeFilter, Channel)> {
        let params = GfdmParams::new(self.k, self.m, self.sigma_n2, self.alpha)?;
        let proto = PrototypeFilter::build(&params)?;
        let ch = Channel::exponential(self.channel_len, params.n(), self.seed)?;
        Ok((params, proto, ch))
    }
}

fn rel_vec_error(a: &[C64], reference: &[C64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(reference)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale: f64 = reference.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Checks the structured filter and its building blocks against dense
/// computations for one system.
pub fn verify(cfg: &SystemConfig) -> Result<VerifyReport> {
    let (params, proto, ch) = cfg.build()?;
    let (k, m, n) = (params.k(), params.m(), params.n());
    let sigma = params.sigma_n2();
    let mut report = VerifyReport::default();

    let a = modulation_matrix_dense(&params, &proto)?;
    let direct = lmmse_direct(&a, &ch, sigma, None)?;
    let fast = compute_fast_filter(&params, &proto, &ch, None)?;
    report.checks.push(Check {
        name: "fast vs direct filter (rel. Frobenius)",
        value: fast.to_lmmse_filter().w.rel_error(&direct.w),
        tolerance: TOL_FILTER,
    });

    // Dense G_s and its frequency-domain image.
    let g = ch.to_dense().matmul(&a);
    let gs = g.submatrix(0, 0, n, k);
    let f = oracle::dft_matrix(n);
    let fgs = f.matmul(&gs);

    let freq_as = precompute_freq_as(&params, &proto)?;
    let freq_gs = compute_freq_gs(&freq_as, &ch, None)?;
    let (dw, _) = compute_eigen_blocks(&freq_as, &ch, sigma, None)?;

    let mut gram_err = 0.0f64;
    let mut off_band = 0.0f64;
    let mut du_off_diag = 0.0f64;
    let mut residual = 0.0f64;
    for u in 0..m {
        let dgu = oracle::zak_row_matrix(k, m, u).matmul(&gs);
        let mut gram = dgu.adjoint().matmul(&dgu);
        gram.add_diagonal(C64::new(sigma, 0.0));
        let t = build_tridiagonal(&freq_gs, u, sigma, None)?;
        gram_err = gram_err.max(t.to_dense().rel_error(&gram));

        let du = oracle::du_matrix(k, m, u);
        du_off_diag = du_off_diag.max(oracle::off_diagonal_ratio(&du));
        off_band = off_band.max(oracle::off_band_ratio(&fgs.adjoint().matmul(&du).matmul(&fgs)));

        let rhs = dgu.adjoint();
        let sol = t.solve(&rhs)?;
        let r = t.to_dense().matmul(&sol.x).sub(&rhs).frobenius_norm() / rhs.frobenius_norm().max(f64::MIN_POSITIVE);
        residual = residual.max(r);
    }
    report.checks.push(Check {
        name: "tridiagonal block vs D_Gu^H D_Gu + s2 I",
        value: gram_err,
        tolerance: TOL_SOLVE,
    });
    report.checks.push(Check {
        name: "F Zu^H Zu F^H off-diagonal",
        value: du_off_diag,
        tolerance: TOL_STRUCTURE,
    });
    report.checks.push(Check {
        name: "Gram block off-band magnitude",
        value: off_band,
        tolerance: TOL_STRUCTURE,
    });
    report.checks.push(Check {
        name: "cyclic solve residual",
        value: residual,
        tolerance: TOL_SOLVE,
    });

    let recon = fast
        .eigen_blocks()
        .blocks()
        .iter()
        .zip(dw.blocks())
        .map(|(a, b)| a.rel_error(b))
        .fold(0.0, f64::max);
    report.checks.push(Check {
        name: "W_s reconstruction consistency",
        value: recon,
        tolerance: TOL_RECONSTRUCT,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut eq_err = 0.0f64;
    let dw_fast = fast.eigen_blocks();
    for _ in 0..10 {
        let y = draw_noise_with(n, 1.0, &mut rng);
        let zak = equalize_zak_blocks(&dw_fast, &y)?;
        let reference = equalize_direct(&direct, &y)?;
        eq_err = eq_err.max(rel_vec_error(&zak, &reference));
    }
    report.checks.push(Check {
        name: "ZAK-domain equalizer vs W^H y",
        value: eq_err,
        tolerance: TOL_EQUALIZER,
    });
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub system: SystemConfig,
    pub repeats: usize,
    pub dense_cap: usize,
}

#[derive(Clone, Debug)]
pub struct StageRow {
    pub stage: Stage,
    pub measured: u64,
    pub formula: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub k: usize,
    pub m: usize,
    pub stages: Vec<StageRow>,
    pub fast_total: u64,
    pub c_sparse: f64,
    pub direct_total: Option<u64>,
    pub c_direct: f64,
    pub fast_ns_min: u128,
    pub fast_ns_mean: u128,
    pub direct_ns: Option<u128>,
}

/// Closed-form reference for each fast stage.
pub fn stage_formula(stage: Stage, k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    match stage {
        Stage::FreqGs => 2.0 * mf * kf,
        Stage::Tridiagonal => 12.0 * mf * mf * kf,
        Stage::Solve => mf * (2.0 * kf + 5.0 * kf * kf),
        Stage::ZakRecon => kf * kf * mf * ld(m as u64),
        // IDFT of the K columns of F_N G_s, then the column-wise ZAK.
        Stage::Dgu => kf * dft_mult_charge(k * m) as f64 + kf * kf * mf * ld(m as u64),
        Stage::Cholesky => (kf * mf).powi(3) / 3.0,
        Stage::Substitution => 2.0 * (kf * mf).powi(3),
    }
}

pub fn bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let (params, proto, ch) = cfg.system.build()?;
    let (k, m) = (params.k(), params.m());
    let counter = OpCounter::new();
    compute_fast_filter(&params, &proto, &ch, Some(&counter))?;

    let repeats = cfg.repeats.max(1);
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        compute_fast_filter(&params, &proto, &ch, None)?;
        times.push(start.elapsed().as_nanos());
    }

    let (direct_total, direct_ns) = if params.n() <= cfg.dense_cap {
        let a = modulation_matrix_dense(&params, &proto)?;
        let start = Instant::now();
        lmmse_direct(&a, &ch, params.sigma_n2(), Some(&counter))?;
        (Some(counter.direct_total()), Some(start.elapsed().as_nanos()))
    } else {
        (None, None)
    };

    Ok(BenchReport {
        k,
        m,
        stages: Stage::FAST
            .iter()
            .map(|&s| StageRow {
                stage: s,
                measured: counter.get(s),
                formula: stage_formula(s, k, m),
            })
            .collect(),
        fast_total: counter.fast_total(),
        c_sparse: c_sparse(k as u64, m as u64),
        direct_total,
        c_direct: crate::complexity::c_direct(k as u64, m as u64),
        fast_ns_min: times.iter().copied().min().unwrap_or(0),
        fast_ns_mean: times.iter().sum::<u128>() / repeats as u128,
        direct_ns,
    })
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    /// Per-sample SNR in dB; `+∞` disables the noise.
    pub snr_db: f64,
    pub blocks: usize,
    pub channel_len: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub sigma_n2: f64,
    pub mse_fast: f64,
    pub mse_direct: f64,
    /// Largest entrywise difference between the two receivers' outputs.
    pub max_receiver_diff: f64,
}

pub fn noise_variance_from_snr_db(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Symbols → modulation → channel + noise → fast (ZAK-domain) and dense
/// receivers.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    let sigma = noise_variance_from_snr_db(cfg.snr_db);
    let params = GfdmParams::new(cfg.k, cfg.m, sigma, cfg.alpha)?;
    let proto = PrototypeFilter::build(&params)?;
    let n = params.n();
    let ch = Channel::exponential(cfg.channel_len, n, cfg.seed)?;
    let a = modulation_matrix(&params, &proto)?;
    let fast = compute_fast_filter(&params, &proto, &ch, None)?;
    let dw = fast.eigen_blocks();
    let direct = lmmse_direct(&a.to_dense(), &ch, sigma, None)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let (mut se_fast, mut se_direct, mut max_diff) = (0.0, 0.0, 0.0f64);
    for _ in 0..cfg.blocks {
        let d = draw_symbols_with(n, &Constellation::Qpsk, &mut rng)?;
        let x = modulate(&a, &d)?;
        let w = draw_noise_with(n, sigma, &mut rng);
        let y = ch.apply(&x, &w)?;
        let est_fast = equalize_zak_blocks(&dw, &y)?;
        let est_direct = equalize_direct(&direct, &y)?;
        for ((s, f), dd) in d.as_slice().iter().zip(&est_fast).zip(&est_direct) {
            se_fast += (s - f).norm_sqr();
            se_direct += (s - dd).norm_sqr();
            max_diff = max_diff.max((f - dd).norm());
        }
    }
    let total = (cfg.blocks * n).max(1) as f64;
    Ok(SimReport {
        sigma_n2: sigma,
        mse_fast: se_fast / total,
        mse_direct: se_direct / total,
        max_receiver_diff: max_diff,
    })
}

/// Dense `N × K` matrix `F_N·G_s` computed from definitions.
pub fn dense_freq_gs(params: &GfdmParams, proto: &PrototypeFilter, ch: &Channel) -> Result<CMat> {
    let a = modulation_matrix_dense(params, proto)?;
    let n = params.n();
    let gs = ch.to_dense().matmul(&a).submatrix(0, 0, n, params.k());
    Ok(oracle::dft_matrix(n).matmul(&gs))
}
