//! Low-complexity LMMSE filter via block diagonalization.
//!
//! `G = H·A` and `W` are block circulant, so `W` is fixed by its eigen-blocks
//!
//! ```text
//! D_{W,u} = D_{G,u} · (D_{G,u}ᴴ·D_{G,u} + σ²·I_K)⁻¹,   u = 0, …, M−1.
//! ```
//!
//! The Gram blocks are formed in the frequency domain. `Z_uᴴ·Z_u` is circulant
//! and `F_N·Z_uᴴ·Z_u·F_Nᴴ = M·diag(1[n ≡ u mod M])`, so
//!
//! ```text
//! D_{G,u}ᴴ·D_{G,u} = M · Σ_{p<K} conj(Γ[u+pM, k]) · Γ[u+pM, k']
//! ```
//!
//! with `Γ = F_N·G_s`. Column `k` of `Γ` lives on the `2M` bins around `k·M`,
//! which hold exactly two bins of every residue class; neighbouring columns
//! share one of them. The Gram block is therefore cyclic tridiagonal and each
//! block costs a Thomas solve with a corner correction.

use std::path::Path;

use rayon::prelude::*;

use crate::complexity::{OpCounter, Stage};
use crate::equalizer::direct::{LmmseFilter, Provenance};
use crate::error::{Error, Result};
use crate::gfdm::{window_bins, Channel, GfdmParams, PrototypeFilter};
use crate::linalg::fourier::dft_mult_charge;
use crate::linalg::{BlockCirculant, BlockDiagonal, CMat, CyclicTridiagonal, DftPlan, Direction, ZakPlan};
use crate::C64;

/// Relative level below which out-of-window prototype energy is ignored.
const BAND_TOL: f64 = 1e-12;

fn count(counter: Option<&OpCounter>, stage: Stage, n: u64) {
    if let Some(c) = counter {
        c.add(stage, n);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    /// Column `k` is nonzero only on the `2M` bins around `k·M`.
    Window,
    /// No usable sparsity (prototype not band-limited).
    Full,
}

/// Frequency-domain first block column, `F_N·A_s` or `F_N·G_s` (`N × K`).
#[derive(Clone, Debug)]
pub struct FreqGs {
    data: CMat,
    m: usize,
    support: Support,
}

impl FreqGs {
    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn k(&self) -> usize {
        self.data.cols()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    /// Rows of column `col` that may be nonzero.
    pub fn column_support(&self, col: usize) -> Vec<usize> {
        match self.support {
            Support::Window => window_bins(col * self.m, self.m, self.n()).collect(),
            Support::Full => (0..self.n()).collect(),
        }
    }

    /// Time-domain first block column (`F_Nᴴ` applied to every column).
    pub fn to_time_domain(&self, counter: Option<&OpCounter>) -> Result<BlockCirculant> {
        let n = self.n();
        let plan = DftPlan::new(n)?;
        let mut gs = CMat::zeros(n, self.k());
        for c in 0..self.k() {
            gs.set_column(c, &plan.transform(&self.data.column(c), Direction::Inverse)?);
        }
        count(counter, Stage::Dgu, self.k() as u64 * dft_mult_charge(n));
        BlockCirculant::from_first_columns(&gs, self.k())
    }
}

/// `F_N·A_s`: column 0 is the prototype spectrum, column `k` its circular
/// shift by `k·M` bins.
pub fn precompute_freq_as(params: &GfdmParams, proto: &PrototypeFilter) -> Result<FreqGs> {
    let (k, m, n) = (params.k(), params.m(), params.n());
    let g = proto.g_freq();
    if g.len() != n {
        return Err(Error::dims(format!("prototype length {n}"), g.len()));
    }
    let support = if proto.is_band_limited(m, BAND_TOL) {
        Support::Window
    } else {
        log::warn!("prototype is not band-limited to two subcarriers; using dense per-block solves");
        Support::Full
    };
    let mut out = FreqGs {
        data: CMat::zeros(n, k),
        m,
        support,
    };
    for col in 0..k {
        for bin in out.column_support(col) {
            out.data[(bin, col)] = g[(bin + n - col * m) % n];
        }
    }
    Ok(out)
}

/// `F_N·G_s = diag(H_diag)·F_N·A_s`, touching only each column's support.
pub fn compute_freq_gs(freq_as: &FreqGs, ch: &Channel, counter: Option<&OpCounter>) -> Result<FreqGs> {
    let n = freq_as.n();
    if ch.n() != n {
        return Err(Error::dims(format!("channel length {n}"), ch.n()));
    }
    let h = ch.h_diag();
    let mut out = FreqGs {
        data: CMat::zeros(n, freq_as.k()),
        m: freq_as.m,
        support: freq_as.support,
    };
    let mut mults = 0u64;
    for col in 0..freq_as.k() {
        for bin in freq_as.column_support(col) {
            out.data[(bin, col)] = h[bin] * freq_as.data[(bin, col)];
            mults += 1;
        }
    }
    count(counter, Stage::FreqGs, mults);
    Ok(out)
}

/// Entries of column `col` in residue class `u`, as `(p, Γ[u + p·M, col])`.
fn residue_entries(freq_gs: &FreqGs, col: usize, u: usize) -> Vec<(usize, C64)> {
    let m = freq_gs.m;
    let mut v: Vec<(usize, C64)> = freq_gs
        .column_support(col)
        .into_iter()
        .filter(|bin| bin % m == u)
        .map(|bin| (bin / m, freq_gs.data[(bin, col)]))
        .collect();
    v.sort_by_key(|e| e.0);
    v
}

/// `Σ conj(a_p)·b_p` over shared `p`, with the multiplication count.
fn sparse_inner(a: &[(usize, C64)], b: &[(usize, C64)]) -> (C64, u64) {
    let (mut i, mut j) = (0, 0);
    let mut acc = C64::default();
    let mut mults = 0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1.conj() * b[j].1;
                mults += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (acc, mults)
}

/// `T_u = Γᴴ·D_u·Γ + σ²·I_K` as a cyclic tridiagonal matrix.
pub fn build_tridiagonal(
    freq_gs: &FreqGs,
    u: usize,
    sigma_n2: f64,
    counter: Option<&OpCounter>,
) -> Result<CyclicTridiagonal> {
    let (k, m) = (freq_gs.k(), freq_gs.m);
    if u >= m {
        return Err(Error::InvalidParameter(format!("block index {u} out of range 0..{m}")));
    }
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "cyclic tridiagonal blocks need K >= 3, got {k}"
        )));
    }
    if freq_gs.support != Support::Window {
        return Err(Error::InvalidParameter(
            "Gram block is not tridiagonal for a non band-limited prototype".into(),
        ));
    }
    let cols: Vec<_> = (0..k).map(|c| residue_entries(freq_gs, c, u)).collect();
    let mf = m as f64;
    let mut mults = 0u64;
    let mut diag = Vec::with_capacity(k);
    for col in &cols {
        let (s, c) = sparse_inner(col, col);
        mults += c;
        diag.push(C64::new(mf * s.re + sigma_n2, 0.0));
    }
    let mut upper = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let (s, c) = sparse_inner(&cols[i], &cols[i + 1]);
        mults += c;
        upper.push(s * mf);
    }
    let (corner, c) = sparse_inner(&cols[k - 1], &cols[0]);
    mults += c;
    let bottom_left = corner * mf;
    let lower = upper.iter().map(|v| v.conj()).collect();
    count(counter, Stage::Tridiagonal, mults);
    CyclicTridiagonal::new(diag, lower, upper, bottom_left.conj(), bottom_left)
}

/// Dense `T_u` from the selected rows of `Γ`; used when `Γ` has no window
/// structure.
pub fn build_gram_block_dense(freq_gs: &FreqGs, u: usize, sigma_n2: f64) -> CMat {
    let (k, m) = (freq_gs.k(), freq_gs.m);
    let rows: Vec<usize> = (0..k).map(|p| u + p * m).collect();
    let mut t = CMat::from_fn(k, k, |a, b| {
        rows.iter()
            .map(|&r| freq_gs.data[(r, a)].conj() * freq_gs.data[(r, b)])
            .sum::<C64>()
            * m as f64
    });
    t.add_diagonal(C64::new(sigma_n2, 0.0));
    t
}

/// `D_{G,u} = Σ_m ω^{u·m}·G_m` for one block index.
pub fn compute_dgu(gs: &BlockCirculant, u: usize) -> Result<CMat> {
    let m = gs.m();
    if u >= m {
        return Err(Error::InvalidParameter(format!("block index {u} out of range 0..{m}")));
    }
    let mut acc = CMat::zeros(gs.k(), gs.k());
    for (i, b) in gs.blocks().iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * ((u * i) % m) as f64 / m as f64;
        acc = acc.add(&b.scale(C64::from_polar(1.0, phase)));
    }
    Ok(acc)
}

/// All `D_{G,u}` at once through a column-wise ZAK transform of `G_s`.
pub fn compute_all_dgu(gs: &BlockCirculant, counter: Option<&OpCounter>) -> Result<BlockDiagonal> {
    let plan = ZakPlan::new(gs.k(), gs.m())?;
    count(counter, Stage::Dgu, gs.k() as u64 * plan.mult_charge());
    Ok(gs.diagonalize_with(&plan))
}

/// Solves block `u`: returns `D_{W,u}` and whether a dense solve was needed.
pub fn solve_block(
    freq_gs: &FreqGs,
    dg: &BlockDiagonal,
    u: usize,
    sigma_n2: f64,
    counter: Option<&OpCounter>,
) -> Result<(CMat, bool)> {
    let k = freq_gs.k();
    let rhs = dg.block(u).adjoint();
    let (s, fallback) = match freq_gs.support {
        Support::Window => {
            let t = build_tridiagonal(freq_gs, u, sigma_n2, counter)?;
            let sol = t.solve(&rhs).map_err(|_| Error::SingularBlock { block: u })?;
            count(counter, Stage::Solve, CyclicTridiagonal::charged_mults(k, k));
            (sol.x, sol.dense_fallback)
        }
        Support::Full => {
            let t = build_gram_block_dense(freq_gs, u, sigma_n2);
            count(counter, Stage::Tridiagonal, (k * k * k) as u64);
            let x = t.solve(&rhs).map_err(|_| Error::SingularBlock { block: u })?;
            count(counter, Stage::Solve, (k * k * k) as u64);
            (x, true)
        }
    };
    Ok((s.adjoint(), fallback))
}

/// Per-block bookkeeping of a fast filter computation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FastDiagnostics {
    /// Blocks solved densely instead of by the cyclic Thomas solver.
    pub dense_blocks: Vec<usize>,
}

/// Eigen-blocks `D_{W,u}` of the LMMSE filter.
pub fn compute_eigen_blocks(
    freq_as: &FreqGs,
    ch: &Channel,
    sigma_n2: f64,
    counter: Option<&OpCounter>,
) -> Result<(BlockDiagonal, FastDiagnostics)> {
    let freq_gs = compute_freq_gs(freq_as, ch, counter)?;
    let gs = freq_gs.to_time_domain(counter)?;
    let dg = compute_all_dgu(&gs, counter)?;
    let solved = (0..freq_gs.m)
        .into_par_iter()
        .map(|u| solve_block(&freq_gs, &dg, u, sigma_n2, counter))
        .collect::<Result<Vec<_>>>()?;
    let mut diag = FastDiagnostics::default();
    let mut blocks = Vec::with_capacity(solved.len());
    for (u, (b, fallback)) in solved.into_iter().enumerate() {
        if fallback {
            diag.dense_blocks.push(u);
        }
        blocks.push(b);
    }
    Ok((BlockDiagonal::new(blocks)?, diag))
}

/// LMMSE filter stored as the first `K` columns `W_s` of `W` (`M·K²`
/// coefficients). The remaining columns are block-circular shifts.
#[derive(Clone, Debug)]
pub struct FastFilter {
    sigma_n2: f64,
    ws: BlockCirculant,
    diagnostics: FastDiagnostics,
}

impl FastFilter {
    pub fn ws(&self) -> &BlockCirculant {
        &self.ws
    }

    pub fn k(&self) -> usize {
        self.ws.k()
    }

    pub fn m(&self) -> usize {
        self.ws.m()
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    pub fn diagnostics(&self) -> &FastDiagnostics {
        &self.diagnostics
    }

    pub fn coefficient_count(&self) -> usize {
        self.ws.coefficient_count()
    }

    /// `D_W = Z·W_s` (scaled), recomputed from the stored columns.
    pub fn eigen_blocks(&self) -> BlockDiagonal {
        self.ws.diagonalize()
    }

    /// Dense expansion, for comparison against the reference receiver.
    pub fn to_lmmse_filter(&self) -> LmmseFilter {
        LmmseFilter {
            w: self.ws.to_dense(),
            provenance: Provenance::Fast,
        }
    }
}

/// Filter from already computed eigen-blocks; `Zᴴ·D_W` is charged to stage (d).
pub fn filter_from_eigen_blocks(
    dw: &BlockDiagonal,
    sigma_n2: f64,
    diagnostics: FastDiagnostics,
    counter: Option<&OpCounter>,
) -> Result<FastFilter> {
    let plan = ZakPlan::new(dw.k(), dw.m())?;
    count(counter, Stage::ZakRecon, dw.k() as u64 * plan.mult_charge());
    Ok(FastFilter {
        sigma_n2,
        ws: dw.reconstruct_with(&plan),
        diagnostics,
    })
}

/// End-to-end fast LMMSE filter. `F_N·A_s` is treated as precomputed and is
/// not counted.
pub fn compute_fast_filter(
    params: &GfdmParams,
    proto: &PrototypeFilter,
    ch: &Channel,
    counter: Option<&OpCounter>,
) -> Result<FastFilter> {
    let freq_as = precompute_freq_as(params, proto)?;
    let (dw, diagnostics) = compute_eigen_blocks(&freq_as, ch, params.sigma_n2(), counter)?;
    if !diagnostics.dense_blocks.is_empty() {
        log::warn!("blocks {:?} were solved densely", diagnostics.dense_blocks);
    }
    filter_from_eigen_blocks(&dw, params.sigma_n2(), diagnostics, counter)
}

/// Equalization in the ZAK domain: `Z·d̂ = blockdiag(D_{W,u})ᴴ·Z·y`.
pub fn equalize_zak(filter: &FastFilter, y: &[C64]) -> Result<Vec<C64>> {
    equalize_zak_blocks(&filter.eigen_blocks(), y)
}

pub fn equalize_zak_blocks(dw: &BlockDiagonal, y: &[C64]) -> Result<Vec<C64>> {
    if y.len() != dw.n() {
        return Err(Error::dims(format!("length {}", dw.n()), format!("length {}", y.len())));
    }
    let plan = ZakPlan::new(dw.k(), dw.m())?;
    dw.apply_conjugated(&plan, y, true)
}

/// `F_N·W_s` (`N × K`), the frequency-domain filter columns.
pub fn filter_to_frequency_domain(filter: &FastFilter) -> Result<CMat> {
    let ws = filter.ws.first_columns();
    let plan = DftPlan::new(ws.rows())?;
    let mut out = CMat::zeros(ws.rows(), ws.cols());
    for c in 0..ws.cols() {
        out.set_column(c, &plan.transform(&ws.column(c), Direction::Forward)?);
    }
    Ok(out)
}

/// Writes `dw_000.txt`, `dw_001.txt`, … (one eigen-block each) and
/// `manifest.txt` into `dir`.
pub fn export_filter(dir: impl AsRef<Path>, filter: &FastFilter, ch: &Channel) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let dw = filter.eigen_blocks();
    for (u, b) in dw.blocks().iter().enumerate() {
        crate::linalg::text::write_matrix(dir.join(format!("dw_{u:03}.txt")), b)?;
    }
    let manifest = format!(
        "K={}\nM={}\nsigma_n2={:e}\nchannel_hash={}\n",
        filter.k(),
        filter.m(),
        filter.sigma_n2(),
        ch.hash()
    );
    std::fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_support_is_rotated_window() {
        let p = GfdmParams::new(4, 3, 0.1, 0.5).unwrap();
        let proto = PrototypeFilter::build(&p).unwrap();
        let fa = precompute_freq_as(&p, &proto).unwrap();
        assert_eq!(fa.support(), Support::Window);
        let s0 = fa.column_support(0);
        for k in 1..4 {
            let sk = fa.column_support(k);
            let rotated: Vec<usize> = s0.iter().map(|b| (b + k * 3) % 12).collect();
            assert_eq!(sk, rotated);
        }
        for (bin, v) in fa.data().column(0).iter().enumerate() {
            assert_eq!(*v, proto.g_freq()[bin]);
        }
    }

    #[test]
    fn identity_channel_leaves_freq_as_unchanged() {
        let p = GfdmParams::new(5, 4, 0.1, 0.5).unwrap();
        let proto = PrototypeFilter::build(&p).unwrap();
        let fa = precompute_freq_as(&p, &proto).unwrap();
        let counter = OpCounter::new();
        let fg = compute_freq_gs(&fa, &Channel::identity(20), Some(&counter)).unwrap();
        assert!(fg.data().sub(fa.data()).max_abs() < 1e-15);
        assert_eq!(counter.get(Stage::FreqGs), 2 * 4 * 5);
    }

    #[test]
    fn flat_prototype_identity_channel_has_equal_diagonal() {
        let p = GfdmParams::new(8, 4, 0.1, 0.0).unwrap();
        let proto = PrototypeFilter::build(&p).unwrap();
        let fa = precompute_freq_as(&p, &proto).unwrap();
        let fg = compute_freq_gs(&fa, &Channel::identity(32), None).unwrap();
        let t = build_tridiagonal(&fg, 0, 0.1, None).unwrap();
        let d0 = t.diag()[0];
        assert!(t.diag().iter().all(|d| (d - d0).norm() < 1e-14));
        assert!(t.is_hermitian(0.0));
    }

    #[test]
    fn dgu_special_cases() {
        let blocks: Vec<CMat> = (0..4)
            .map(|m| CMat::from_fn(3, 3, |r, c| C64::new((r + m) as f64, (c * m) as f64)))
            .collect();
        let gs = BlockCirculant::new(blocks.clone()).unwrap();
        let sum = blocks.iter().skip(1).fold(blocks[0].clone(), |a, b| a.add(b));
        assert!(compute_dgu(&gs, 0).unwrap().sub(&sum).max_abs() < 1e-12);
        let single = BlockCirculant::new(vec![blocks[2].clone()]).unwrap();
        assert_eq!(compute_dgu(&single, 0).unwrap(), blocks[2]);
        assert!(compute_dgu(&gs, 4).is_err());
    }

    #[test]
    fn block_index_out_of_range() {
        let p = GfdmParams::new(4, 3, 0.1, 0.5).unwrap();
        let proto = PrototypeFilter::build(&p).unwrap();
        let fa = precompute_freq_as(&p, &proto).unwrap();
        assert!(build_tridiagonal(&fa, 3, 0.1, None).is_err());
    }
}
