//! Command-line front end for the k-coin identification pipeline.
//!
//! Subcommands: `sample` (draw snapshot histograms), `learn` (run the
//! identification pipeline on a histogram), `eval` (compare a learned
//! model against the truth), `bench` (seeded benchmark sweeps to CSV).
//!
//! Exit codes: 0 success, 2 usage or input error, 3 solver failure
//! (the learn report is still written, carrying the failure status).

mod bench;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use sparse_moments::{
    learn_coin_mixture, matching_permutation, wasserstein, Histogram, LearnConfig,
    MixtureModel,
};

/// Environment variable overriding the floating-point floor applied to
/// the derived solver tolerances.
const FP_FLOOR_ENV: &str = "SPARSE_MOMENTS_FP_FLOOR";

const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "sparse-moments", version, about = "k-coin mixture identification from 2k-snapshot histograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded histogram of m-snapshots from a model file.
    Sample(SampleArgs),
    /// Identify a k-coin model from a histogram file.
    Learn(LearnArgs),
    /// Print alpha/weight/transport errors between two model files.
    Eval(EvalArgs),
    /// Run seeded benchmark sweeps and write a CSV of per-trial rows.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Model JSON file {"k", "alpha", "w"}.
    model: PathBuf,
    /// Snapshot length; must equal 2k for the model's k.
    #[arg(long)]
    m: usize,
    /// Number of snapshots to draw.
    #[arg(long)]
    s: u64,
    /// RNG seed; equal seeds give byte-identical output.
    #[arg(long)]
    seed: u64,
    /// Output histogram JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Histogram JSON file {"m", "s", "counts"}.
    histogram: PathBuf,
    /// Model order to identify.
    #[arg(long)]
    k: usize,
    /// Lower bound on the separation between coin biases.
    #[arg(long)]
    zeta: f64,
    /// Lower bound on the mixing weights.
    #[arg(long)]
    wmin: f64,
    /// Accuracy exponent; the target parameter error is 2^-gamma.
    #[arg(long)]
    gamma: f64,
    /// Failure probability used by sample planning (default 0.01).
    #[arg(long)]
    delta: Option<f64>,
    /// Output report JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth model JSON file.
    truth: PathBuf,
    /// Learned model JSON file.
    learned: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Sample(args) => cmd_sample(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => bench::cmd_bench(args),
    }
}

fn cmd_sample(args: SampleArgs) -> ExitCode {
    let model: MixtureModel = match read_json(&args.model) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    if args.m != 2 * model.k() {
        return usage_error(&format!(
            "snapshot length {} must equal 2k = {} for this model",
            args.m,
            2 * model.k()
        ));
    }
    let histogram = match model.sample_histogram(args.m, args.s, args.seed) {
        Ok(h) => h,
        Err(e) => return usage_error(&e.to_string()),
    };
    match write_json(&args.out, &histogram) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => usage_error(&msg),
    }
}

fn cmd_learn(args: LearnArgs) -> ExitCode {
    let histogram: Histogram = match read_json(&args.histogram) {
        Ok(h) => h,
        Err(msg) => return usage_error(&msg),
    };
    if histogram.counts().len() != 2 * args.k + 1 {
        return usage_error(&format!(
            "histogram has {} bins but k = {} needs {}",
            histogram.counts().len(),
            args.k,
            2 * args.k + 1
        ));
    }
    let cfg = match build_config(args.k, args.zeta, args.wmin, args.gamma, args.delta) {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(&msg),
    };
    match learn_coin_mixture(&cfg, &histogram) {
        Ok(result) => {
            let out = report::CliReport::success(result);
            match write_json(&args.out, &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => usage_error(&msg),
            }
        }
        Err(err) => {
            let out = report::CliReport::failure(&err);
            if let Err(msg) = write_json(&args.out, &out) {
                return usage_error(&msg);
            }
            eprintln!("solver failed: {err}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}

fn cmd_eval(args: EvalArgs) -> ExitCode {
    let truth: MixtureModel = match read_json(&args.truth) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    let learned: MixtureModel = match read_json(&args.learned) {
        Ok(m) => m,
        Err(msg) => return usage_error(&msg),
    };
    if truth.k() != learned.k() {
        return usage_error(&format!(
            "matching distance needs equal orders, got k = {} and k = {}",
            truth.k(),
            learned.k()
        ));
    }
    let (alpha_err, perm) = match matching_permutation(truth.alpha(), learned.alpha()) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };
    let w_err = truth
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w - learned.weights()[perm[i]]).abs())
        .fold(0.0, f64::max);
    let transport = wasserstein(&truth, &learned);
    println!("{alpha_err},{w_err},{transport}");
    ExitCode::SUCCESS
}

/// LearnConfig from CLI flags plus the tolerance-floor env override.
fn build_config(
    k: usize,
    zeta: f64,
    wmin: f64,
    gamma: f64,
    delta: Option<f64>,
) -> Result<LearnConfig, String> {
    let mut cfg = LearnConfig::new(k, zeta, wmin, gamma).map_err(|e| e.to_string())?;
    if let Some(delta) = delta {
        cfg = cfg.with_delta(delta).map_err(|e| e.to_string())?;
    }
    if let Ok(floor) = std::env::var(FP_FLOOR_ENV) {
        let parsed: f64 = floor
            .parse()
            .map_err(|_| format!("{FP_FLOOR_ENV} is not a number: {floor}"))?;
        cfg = cfg.with_fp_floor(parsed).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let data = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&data).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut data = serde_json::to_string_pretty(value)
        .map_err(|e| format!("cannot serialize {}: {e}", path.display()))?;
    data.push('\n');
    std::fs::write(path, data).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
