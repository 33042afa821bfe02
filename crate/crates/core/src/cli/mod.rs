//! Command-line interface: `fit`, `eval`, `infer`, `sample` and `llp-bench`.
//!
//! Failures print one JSON line `{"error": kind, "message": text}` on stderr
//! and exit with 1 for numerical failures, 2 for bad input.

mod commands;
mod config;
mod model;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_eval, cmd_fit, cmd_infer, cmd_llp_bench, cmd_sample, EvalArgs, FitArgs, InferArgs,
    MetricsReport, SampleArgs,
};
pub use config::{BagConfig, ExperimentConfig, FitMethod, KernelKind, Task};
pub use model::{ModelFile, Preprocess};

#[derive(Debug, Parser)]
#[command(name = "kdm", version, about = "Kernel density matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Auc,
    Accuracy,
    Nll,
    Mse,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::Accuracy => "accuracy",
            Metric::Nll => "nll",
            Metric::Mse => "mse",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from an experiment config; writes model.json,
    /// metrics.jsonl and, when used, preprocess.json.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `train.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// preprocess.json written by `fit`.
        #[arg(long)]
        preprocess: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        metric: Vec<Metric>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward: input rows to output distributions. Reverse: label rows
    /// (or one class) to input-side KDMs.
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// CSV of input rows (forward) or label rows (reverse).
        #[arg(long, required_unless_present = "label")]
        data: Option<PathBuf>,
        /// Reverse only: one-hot of this class index.
        #[arg(long, conflicts_with = "data")]
        label: Option<usize>,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Direction,
        #[arg(long)]
        preprocess: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw samples from a KDM file or from the input side of a joint model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the label-proportion benchmark described by a config.
    LlpBench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> crate::error::Result<()> {
    match cli.command {
        Command::Fit {
            config,
            seed,
            data,
            schema,
            out,
        } => cmd_fit(&FitArgs {
            config,
            seed,
            data,
            schema,
            out,
        }),
        Command::Eval {
            model,
            data,
            schema,
            preprocess,
            metric,
            out,
        } => cmd_eval(&EvalArgs {
            model,
            data,
            schema,
            preprocess,
            metrics: metric,
            out,
        }),
        Command::Infer {
            model,
            data,
            label,
            direction,
            preprocess,
            out,
        } => cmd_infer(&InferArgs {
            model,
            data,
            label,
            direction,
            preprocess,
            out,
        }),
        Command::Sample {
            model,
            n,
            seed,
            out,
        } => cmd_sample(&SampleArgs {
            model,
            n,
            seed,
            out,
        }),
        Command::LlpBench { config, seed, out } => cmd_llp_bench(&config, seed, out.as_deref()),
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report_error("UsageError", e.to_string().lines().next().unwrap_or(""));
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            e.exit_code()
        }
    }
}

