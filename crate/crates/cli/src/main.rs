use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gfdm_lmmse::complexity::sweep::{emit_csv, parse_grid, run_sweep, to_csv, SweepConfig};
use gfdm_lmmse::equalizer::{compute_fast_filter, export_filter};
use gfdm_lmmse::gfdm::ParamFile;
use gfdm_lmmse::harness::{bench, simulate, verify, BenchConfig, SimConfig, SystemConfig};
use gfdm_lmmse::Error;

const EXIT_TOLERANCE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "gfdm-lmmse", version, about = "Low-complexity LMMSE filters for GFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fast filter and its building blocks against dense oracles.
    Verify(VerifyArgs),
    /// Per-stage multiplication counts against the closed forms, and wall times.
    Bench(BenchArgs),
    /// Closed-form and measured costs over a (K, M) grid, as CSV.
    Sweep(SweepArgs),
    /// Transmit random QPSK blocks and report the symbol MSE of both receivers.
    Simulate(SimArgs),
}

/// System flags shared by `verify` and `bench`. Unset flags fall back to the
/// `--config` file, then to the defaults.
#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Prototype roll-off in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Channel impulse response length.
    #[arg(long)]
    chan_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter file with `key=value` lines (K, M, alpha, sigma_n2,
    /// channel_len, seed).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<SystemConfig> {
        let file = match &self.config {
            Some(p) => ParamFile::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => ParamFile::default(),
        };
        Ok(SystemConfig {
            k: self.k.or(file.k).unwrap_or(8),
            m: self.m.or(file.m).unwrap_or(4),
            alpha: self.alpha.or(file.alpha).unwrap_or(0.5),
            sigma_n2: self.sigma2.or(file.sigma_n2).unwrap_or(0.1),
            channel_len: self.chan_len.or(file.channel_len).unwrap_or(4),
            seed: self.seed.or(file.seed).unwrap_or(1),
        })
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Also write the eigen-blocks and a manifest into this directory.
    #[arg(long)]
    export_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Largest N for which the dense reference is timed and counted.
    #[arg(long, default_value_t = 1024)]
    dense_cap: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated `KxM` points; defaults to K in {8..128}, M in {4..32}.
    #[arg(long)]
    grid: Option<String>,
    /// Output file; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall times (makes the output machine dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value_t = 1024)]
    dense_cap: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    chan_len: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma2: f64,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 7)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Per-sample SNR in dB; `inf` disables the noise.
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 100)]
    blocks: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 4)]
    chan_len: usize,
}

fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = args.system.resolve()?;
    println!(
        "verify K={} M={} alpha={} sigma2={:e} chan_len={} seed={}",
        cfg.k, cfg.m, cfg.alpha, cfg.sigma_n2, cfg.channel_len, cfg.seed
    );
    let report = verify(&cfg)?;
    for c in &report.checks {
        let status = if c.passed() { "ok" } else { "FAIL" };
        println!("  {:<44} {:>10.3e}  tol {:.0e}  {status}", c.name, c.value, c.tolerance);
    }
    if let Some(dir) = &args.export_dir {
        let (params, proto, ch) = cfg.build()?;
        let fast = compute_fast_filter(&params, &proto, &ch, None)?;
        export_filter(dir, &fast, &ch)?;
        println!("eigen-blocks written to {}", dir.display());
    }
    Ok(report.passed())
}

fn run_bench(args: &BenchArgs) -> Result<bool> {
    let system = args.system.resolve()?;
    let report = bench(&BenchConfig {
        system,
        repeats: args.repeats,
        dense_cap: args.dense_cap,
    })?;
    println!("bench K={} M={} N={}", report.k, report.m, report.k * report.m);
    println!("  {:<18} {:>14} {:>16}", "stage", "measured", "formula");
    for row in &report.stages {
        println!("  {:<18} {:>14} {:>16.0}", row.stage.label(), row.measured, row.formula);
    }
    println!(
        "  {:<18} {:>14} {:>16.0}",
        "fast total", report.fast_total, report.c_sparse
    );
    match report.direct_total {
        Some(d) => println!("  {:<18} {:>14} {:>16.0}", "direct total", d, report.c_direct),
        None => println!("  {:<18} {:>14} {:>16.0}", "direct total", "skipped", report.c_direct),
    }
    println!(
        "  fast time: min {} ns, mean {} ns",
        report.fast_ns_min, report.fast_ns_mean
    );
    if let Some(t) = report.direct_ns {
        println!("  direct time: {t} ns");
    }
    Ok(true)
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<bool> {
    let mut cfg = SweepConfig {
        channel_seed: args.seed,
        channel_len: args.chan_len,
        alpha: args.alpha,
        sigma_n2: args.sigma2,
        dense_cap: args.dense_cap,
        timing: args.timing,
        ..SweepConfig::default()
    };
    if let Some(g) = &args.grid {
        cfg.grid = parse_grid(g)?;
    }
    let records = run_sweep(&cfg);
    match &args.out {
        Some(path) => {
            emit_csv(&records, path)?;
            eprintln!("{} rows written to {}", records.len(), path.display());
        }
        None => print!("{}", to_csv(&records)),
    }
    Ok(records.iter().all(|r| r.error.is_none()))
}

fn run_simulate(args: &SimArgs) -> Result<bool> {
    let report = simulate(&SimConfig {
        k: args.k,
        m: args.m,
        alpha: args.alpha,
        snr_db: args.snr_db,
        blocks: args.blocks,
        channel_len: args.chan_len,
        seed: args.seed,
    })?;
    println!(
        "simulate K={} M={} snr_db={} sigma2={:e} blocks={}",
        args.k, args.m, args.snr_db, report.sigma_n2, args.blocks
    );
    println!("  mse fast    {:.6e}", report.mse_fast);
    println!("  mse direct  {:.6e}", report.mse_direct);
    println!("  max |fast - direct| {:.3e}", report.max_receiver_diff);
    Ok(report.max_receiver_diff <= gfdm_lmmse::harness::TOL_EQUALIZER)
}

/// Bad parameters are usage errors; anything else is a failed run.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidParameter(_)
            | Error::Parse(_)
            | Error::EmptyInput
            | Error::DimensionMismatch { .. }
            | Error::SingularModulation { .. },
        ) => EXIT_USAGE,
        _ => EXIT_TOLERANCE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Bench(a) => run_bench(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Simulate(a) => run_simulate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_TOLERANCE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
