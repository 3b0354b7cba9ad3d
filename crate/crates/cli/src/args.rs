use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbs_core::cbs::DEFAULT_THRESHOLD;
use cbs_core::eval::DEFAULT_MAX_BUDGET;
use cbs_core::importance::{DEFAULT_PERMUTATIONS, IMPORTANCE_THRESHOLD};
use cbs_core::model::Split;

#[derive(Debug, Parser)]
#[command(name = "cbs", version, about = "Coverage-based ranking of hyperparameter configurations")]
pub struct Cli {
    /// Output style.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Search-space file (JSON).
    #[arg(long)]
    pub space: PathBuf,
    /// Score file (CSV).
    #[arg(long)]
    pub scores: PathBuf,
}

#[derive(Debug, Args)]
pub struct Analysis {
    /// Datasets to use, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    /// Training sizes to use, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub train_sizes: Vec<u64>,
    /// Drop contexts whose scores are all zero instead of failing.
    #[arg(long)]
    pub skip_degenerate: bool,
    /// Write results into this directory instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Normalization {
    /// Divide by the best test score in the context.
    ContextMax,
    /// Divide by the test score of the validation-selected configuration.
    UpperBound,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceFilter {
    All,
    Cbs,
    Default,
}

impl SourceFilter {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceFilter::All => "all",
            SourceFilter::Cbs => "cbs",
            SourceFilter::Default => "default",
        }
    }
}

fn threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("{s} must lie strictly between 0 and 1"))
    }
}

fn split(s: &str) -> Result<Split, String> {
    s.parse()
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("'{s}' is not a positive integer")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a score file against its space and report grid completeness.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank configurations by coverage.
    Rank {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long, value_parser = split, default_value = "test")]
        split: Split,
        #[arg(long, value_parser = threshold, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Only print the first N entries.
        #[arg(long, value_parser = positive)]
        top: Option<usize>,
    },
    /// Leave-one-dataset-out evaluation of the rank-1 configuration.
    Loo {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        analysis: Analysis,
        /// Split used to build the rankings.
        #[arg(long, value_parser = split, default_value = "test")]
        split: Split,
        #[arg(long, value_parser = threshold, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Held-out score when trying the top k configurations, k = 1..max.
    Budget {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        analysis: Analysis,
        /// Split used to build the rankings.
        #[arg(long, value_parser = split, default_value = "test")]
        split: Split,
        #[arg(long, value_parser = threshold, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_MAX_BUDGET)]
        max_budget: usize,
        #[arg(long, value_enum, default_value_t = Normalization::ContextMax)]
        normalization: Normalization,
    },
    /// Cross-dataset consistency of each hyperparameter, with permutation p-values.
    Importance {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long, value_parser = split, default_value = "test")]
        split: Split,
        #[arg(long, value_parser = threshold, default_value_t = IMPORTANCE_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_PERMUTATIONS)]
        permutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also treat every (dataset, size) as its own unit in one extra scope.
        #[arg(long)]
        combined: bool,
    },
    /// Default vs CBS_1 vs Upper Bound, averaged per task and training size.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long, value_parser = split, default_value = "test")]
        split: Split,
        #[arg(long, value_parser = threshold, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// dataset,task CSV, or `builtin` for the built-in grouping.
        #[arg(long)]
        task_map: Option<String>,
        /// Baseline configuration as name=value pairs, comma separated.
        #[arg(long)]
        default: Option<String>,
        /// Space of a separate baseline score file.
        #[arg(long)]
        default_space: Option<PathBuf>,
        /// Separate score file holding the baseline's results.
        #[arg(long)]
        default_scores: Option<PathBuf>,
    },
    /// Print the built-in published recommendations.
    Recommend {
        #[arg(long)]
        model: Option<String>,
        /// full_ft or lora.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, value_enum, default_value_t = SourceFilter::All)]
        source: SourceFilter,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in search space as a space file.
    Space {
        #[arg(long)]
        model: String,
        /// full_ft or lora.
        #[arg(long)]
        method: String,
        /// The single-point Default space instead of the searched grid.
        #[arg(long)]
        default: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded synthetic score table (not measured data).
    Synth {
        /// Use this space instead of a generated one.
        #[arg(long, conflicts_with = "hps")]
        space: Option<PathBuf>,
        /// Domain sizes of generated categorical hyperparameters.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 3, 2])]
        hps: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        datasets: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000])]
        train_sizes: Vec<u64>,
        /// Cross-dataset correlation of configuration quality in [0, 1].
        #[arg(long, default_value_t = 0.6)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.2)]
        size_noise: f64,
        #[arg(long, default_value_t = 0.1)]
        split_noise: f64,
        #[arg(long, default_value_t = 0.0)]
        drop_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving scores.csv and space.json.
        #[arg(long)]
        out: PathBuf,
    },
}
