//! Benchmark harness: seeded sweeps over (k, s) grids with per-trial
//! substreams, parallel execution, and deterministic row order.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;

use sparse_moments::{
    learn_coin_mixture, matching_permutation, random_canonical_model, rng, wasserstein,
};

use crate::report::status_label;

/// Accuracy exponent used for every benchmark trial.
const BENCH_GAMMA: f64 = 20.0;

/// Schema version stamped in the CSV header comment.
const CSV_SCHEMA: &str = "sparse-moments bench csv v1";

const CSV_HEADER: &str =
    "k,zeta,w_min,s,seed,alpha_err_inf,w_err_inf,wasserstein,learn_time_ns,status";

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated model orders, e.g. 2,3,4.
    #[arg(long = "k-list", value_delimiter = ',', required = true)]
    k_list: Vec<usize>,
    /// Separation lower bound for the instance generator and the solver.
    #[arg(long)]
    zeta: f64,
    /// Weight lower bound for the instance generator and the solver.
    #[arg(long)]
    wmin: f64,
    /// Comma-separated sample sizes, e.g. 10000,100000.
    #[arg(long = "s-list", value_delimiter = ',', required = true)]
    s_list: Vec<u64>,
    /// Trials per (k, s) cell.
    #[arg(long)]
    trials: u64,
    /// Master seed; each trial draws from the substream (seed, k, s, trial).
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

struct BenchRow {
    k: usize,
    zeta: f64,
    w_min: f64,
    s: u64,
    seed: u64,
    alpha_err_inf: f64,
    w_err_inf: f64,
    wasserstein: f64,
    learn_time_ns: u128,
    status: &'static str,
}

impl BenchRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.zeta,
            self.w_min,
            self.s,
            self.seed,
            self.alpha_err_inf,
            self.w_err_inf,
            self.wasserstein,
            self.learn_time_ns,
            self.status
        )
    }
}

pub fn cmd_bench(args: BenchArgs) -> ExitCode {
    if let Err(msg) = validate(&args) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }

    let cells: Vec<(usize, u64, u64)> = args
        .k_list
        .iter()
        .flat_map(|&k| {
            args.s_list
                .iter()
                .flat_map(move |&s| (0..args.trials).map(move |t| (k, s, t)))
        })
        .collect();

    // Trials own disjoint substreams, so parallel execution cannot change
    // any value; ordered collect keeps rows in index order.
    let rows: Vec<Result<BenchRow, String>> = cells
        .par_iter()
        .map(|&(k, s, trial)| run_trial(&args, k, s, trial))
        .collect();

    let mut csv = String::new();
    csv.push_str(&format!("# {CSV_SCHEMA}\n"));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for row in rows {
        match row {
            Ok(row) => {
                csv.push_str(&row.to_csv());
                csv.push('\n');
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        }
    }
    if let Err(e) = std::fs::write(&args.out, csv) {
        eprintln!("error: cannot write {}: {e}", args.out.display());
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn validate(args: &BenchArgs) -> Result<(), String> {
    if args.k_list.is_empty() || args.s_list.is_empty() {
        return Err("k-list and s-list must be non-empty".into());
    }
    for &k in &args.k_list {
        if k == 0 {
            return Err("model orders must be >= 1".into());
        }
        if k >= 2 && args.zeta > 1.0 / (k as f64 - 1.0) {
            return Err(format!(
                "separation {} exceeds 1/(k-1) for k = {k}",
                args.zeta
            ));
        }
        if args.wmin * k as f64 > 1.0 {
            return Err(format!("weight bound {} exceeds 1/k for k = {k}", args.wmin));
        }
    }
    if !args.zeta.is_finite() || args.zeta <= 0.0 || args.zeta > 1.0 {
        return Err(format!("separation {} outside (0, 1]", args.zeta));
    }
    if args.wmin <= 0.0 {
        return Err("weight bound must be positive".into());
    }
    if args.s_list.contains(&0) {
        return Err("sample sizes must be >= 1".into());
    }
    Ok(())
}

fn run_trial(args: &BenchArgs, k: usize, s: u64, trial: u64) -> Result<BenchRow, String> {
    let mut stream = rng::substream(args.seed, &[k as u64, s, trial]);
    let trial_seed = rng::mix(&[args.seed, k as u64, s, trial]);

    let truth = random_canonical_model(&mut stream, k, args.zeta, args.wmin)
        .map_err(|e| format!("instance generation failed for k={k}: {e}"))?;
    let histogram = truth
        .sample_histogram_with(&mut stream, 2 * k, s)
        .map_err(|e| format!("sampling failed for k={k}, s={s}: {e}"))?;
    let cfg = crate::build_config(k, args.zeta, args.wmin, BENCH_GAMMA, None)
        .map_err(|e| format!("configuration failed for k={k}: {e}"))?;

    let begin = Instant::now();
    let outcome = learn_coin_mixture(&cfg, &histogram);
    let learn_time_ns = begin.elapsed().as_nanos();

    let row = match outcome {
        Ok(result) => {
            let learned = &result.model;
            let (alpha_err, perm) = matching_permutation(truth.alpha(), learned.alpha())
                .map_err(|e| format!("evaluation failed: {e}"))?;
            let w_err = truth
                .weights()
                .iter()
                .enumerate()
                .map(|(i, &w)| (w - learned.weights()[perm[i]]).abs())
                .fold(0.0, f64::max);
            BenchRow {
                k,
                zeta: args.zeta,
                w_min: args.wmin,
                s,
                seed: trial_seed,
                alpha_err_inf: alpha_err,
                w_err_inf: w_err,
                wasserstein: wasserstein(&truth, learned),
                learn_time_ns,
                status: "ok",
            }
        }
        Err(err) => BenchRow {
            k,
            zeta: args.zeta,
            w_min: args.wmin,
            s,
            seed: trial_seed,
            alpha_err_inf: f64::NAN,
            w_err_inf: f64::NAN,
            wasserstein: f64::NAN,
            learn_time_ns,
            status: status_label(&err),
        },
    };
    Ok(row)
}
