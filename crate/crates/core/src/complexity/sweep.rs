//! Sweep over `(K, M)` comparing closed-form counts, instrumented counts,
//! wall times and the fast-vs-dense filter error.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::complexity::formulas::{c_direct, c_sparse};
use crate::complexity::OpCounter;
use crate::equalizer::{compute_fast_filter, lmmse_direct};
use crate::error::Result;
use crate::gfdm::{modulation_matrix_dense, Channel, GfdmParams, PrototypeFilter};

pub const CSV_HEADER: &str = "K,M,N,c_sparse,c_direct,measured_mults,t_fast_ns,t_direct_ns,filter_err";

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: Vec<(usize, usize)>,
    pub channel_seed: u64,
    pub channel_len: usize,
    pub alpha: f64,
    pub sigma_n2: f64,
    /// The dense reference only runs for `N` up to this size.
    pub dense_cap: usize,
    /// Record wall times. Off by default so the CSV is byte-stable.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mut grid = Vec::new();
        for k in [8, 16, 32, 64, 128] {
            for m in [4, 8, 16, 32] {
                grid.push((k, m));
            }
        }
        Self {
            grid,
            channel_seed: 1,
            channel_len: 4,
            alpha: 0.5,
            sigma_n2: 0.1,
            dense_cap: 1024,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub c_sparse: f64,
    pub c_direct: f64,
    pub measured_fast_mults: Option<u64>,
    pub measured_direct_mults: Option<u64>,
    pub wall_time_fast_ns: Option<u128>,
    pub wall_time_direct_ns: Option<u128>,
    pub filter_error: Option<f64>,
    /// Set when the point could not be evaluated.
    pub error: Option<String>,
}

/// Parses `"8x4,16x8"` into `[(8, 4), (16, 8)]`.
pub fn parse_grid(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (k, m) = item
                .split_once(['x', 'X'])
                .ok_or_else(|| crate::Error::Parse(format!("grid point `{item}` is not KxM")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| crate::Error::Parse(format!("grid point `{item}` is not KxM")))
            };
            Ok((parse(k)?, parse(m)?))
        })
        .collect()
}

fn run_point(cfg: &SweepConfig, k: usize, m: usize, rec: &mut SweepRecord) -> Result<()> {
    let params = GfdmParams::new(k, m, cfg.sigma_n2, cfg.alpha)?;
    let proto = PrototypeFilter::build(&params)?;
    let ch = Channel::exponential(cfg.channel_len.min(params.n()), params.n(), cfg.channel_seed)?;

    let counter = OpCounter::new();
    let start = Instant::now();
    let fast = compute_fast_filter(&params, &proto, &ch, Some(&counter))?;
    let t_fast = start.elapsed().as_nanos();
    rec.measured_fast_mults = Some(counter.fast_total());
    if cfg.timing {
        rec.wall_time_fast_ns = Some(t_fast);
    }

    if params.n() <= cfg.dense_cap {
        let a = modulation_matrix_dense(&params, &proto)?;
        let start = Instant::now();
        let direct = lmmse_direct(&a, &ch, params.sigma_n2(), Some(&counter))?;
        let t_direct = start.elapsed().as_nanos();
        rec.measured_direct_mults = Some(counter.direct_total());
        if cfg.timing {
            rec.wall_time_direct_ns = Some(t_direct);
        }
        rec.filter_error = Some(fast.to_lmmse_filter().w.rel_error(&direct.w));
    }
    Ok(())
}

/// Evaluates every grid point. Failing points are recorded with an error and
/// the sweep continues.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<SweepRecord> {
    cfg.grid
        .iter()
        .map(|&(k, m)| {
            let mut rec = SweepRecord {
                k,
                m,
                n: k * m,
                c_sparse: c_sparse(k as u64, m as u64),
                c_direct: c_direct(k as u64, m as u64),
                measured_fast_mults: None,
                measured_direct_mults: None,
                wall_time_fast_ns: None,
                wall_time_direct_ns: None,
                filter_error: None,
                error: None,
            };
            if let Err(e) = run_point(cfg, k, m, &mut rec) {
                log::warn!("sweep point K={k} M={m} failed: {e}");
                rec.error = Some(e.to_string());
            }
            rec
        })
        .collect()
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let err = if r.error.is_some() {
            "ERR".to_string()
        } else {
            r.filter_error.map(|e| format!("{e:e}")).unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.m,
            r.n,
            r.c_sparse,
            r.c_direct,
            opt(&r.measured_fast_mults),
            opt(&r.wall_time_fast_ns),
            opt(&r.wall_time_direct_ns),
            err
        );
    }
    out
}

pub fn emit_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_csv(records))?;
    Ok(())
}
