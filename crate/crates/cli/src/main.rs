//! `leml`: train, apply and evaluate low-rank multi-label models.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when training
//! aborts on a non-finite value.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leml::{LossKind, TrainMode};

#[derive(Debug, Parser)]
#[command(name = "leml", version, about = "Low-rank empirical risk minimization for multi-label learning")]
struct Cli {
    /// Worker threads for the numerical kernels; 1 keeps the deterministic reference mode.
    #[arg(long, global = true, env = "LEML_THREADS", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,

    /// Index of the first feature and label in data files.
    #[arg(long, global = true, default_value_t = 0)]
    index_base: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model by alternating minimization.
    Train(TrainArgs),
    /// Write scores or top-K labels for a dataset.
    Predict(PredictArgs),
    /// Print evaluation metrics on fully labelled data.
    Eval(EvalArgs),
    /// Reveal a random fraction of a fully labelled dataset.
    Mask(MaskArgs),
    /// Exact rank-constrained squared-loss solution without regularization.
    ClosedForm(ClosedFormArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = LossKind::Squared)]
    loss: LossKind,
    /// Outer alternating rounds.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = TrainMode::Auto)]
    mode: TrainMode,
    #[arg(long, default_value_t = 1e-4)]
    cg_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    tron_tol: f64,
    #[arg(long)]
    out: PathBuf,
    /// Per-half-step `step objective seconds inner_iters` lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Write the K best label indices instead of all scores.
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long)]
    scores_out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated subset of top1,top3,top5,hamming,auc.
    #[arg(long, default_value = "top1,top3,top5,hamming,auc")]
    metrics: String,
    /// Hamming decision threshold; defaults to 0.5 for squared loss, 0 otherwise.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct MaskArgs {
    #[arg(long)]
    data: PathBuf,
    /// Fraction of label cells to reveal, in (0, 1].
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClosedFormArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also compute the label-space route and print the Frobenius gap.
    #[arg(long)]
    compare_cplst: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
