use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hmmaccel_core::cluster::Distance;

mod commands;

#[derive(Parser)]
#[command(name = "hmmaccel", version, about = "Cluster-weighted HMM training toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample sequences from a model file
    Gen {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        renormalize: bool,
    },
    /// Group zero-distance sequences into a weighted cluster table
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "dtw", value_parser = parse_distance)]
        distance: Distance,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        min_weight: Option<u64>,
        #[arg(long, default_value_t = 0)]
        category: u32,
    },
    /// Baum-Welch training from a sequence file or a cluster table
    Train {
        #[arg(long)]
        input: PathBuf,
        /// Initial model; when absent a random model is drawn from --seed
        #[arg(long)]
        init_model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        states: usize,
        /// Alphabet size for a seeded init; defaults to the largest symbol + 1
        #[arg(long)]
        symbols: Option<usize>,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV path; defaults to <out>.trace.csv
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        renormalize: bool,
    },
    /// Print log P(O | model) for every sequence
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        renormalize: bool,
    },
    /// Print the Viterbi path and its log-probability for every sequence
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        renormalize: bool,
    },
    /// Distance matrix between the sequences of two files
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "dtw", value_parser = parse_distance)]
        distance: Distance,
    },
    /// Time classical against cluster-weighted training
    Bench {
        /// Generator model; defaults to the bundled 3-state, 10-symbol model
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1000, 10000])]
        sizes: Vec<usize>,
        #[arg(long)]
        include_100k: bool,
        #[arg(long, default_value_t = 5)]
        length: usize,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value = "dtw", value_parser = parse_distance)]
        distance: Distance,
        /// Also run a row on time-warped copies of 25 base patterns
        #[arg(long)]
        warped: bool,
        #[arg(long, default_value_t = 30000)]
        warped_count: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        renormalize: bool,
    },
}

fn parse_distance(s: &str) -> Result<Distance, String> {
    s.parse().map_err(|e: hmmaccel_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
