use chl::cli::{run_gradcheck, run_synth, run_train, TrainRequest, SCENARIOS};
use chl::embed::TrainLoss;
use chl::export::{GradcheckSpec, SynthSpec};
use chl::optim::OptimizationRun;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "chl",
    version,
    about = "Histogram-based similarity losses: synthetic studies, gradient checks, embedding training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descend the loss directly on pair distances for synthetic similarity distributions
    Synth {
        /// Scenario: uniform, concentrated, mostly_dissimilar, mostly_similar, or all
        #[arg(long, default_value = "all")]
        dist: String,
        /// Grid size, used for both distance and similarity bins
        #[arg(long, default_value_t = 51)]
        bins: usize,
        /// Number of synthetic pairs
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        /// Gradient descent step size
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 3000)]
        iters: usize,
        /// Comma-separated snapshot steps; default 500,1000,3000 capped at --iters
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; defaults to $CHL_OUT_DIR, then ./chl-out
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify analytic gradients against central finite differences
    Gradcheck {
        /// Random distance batches to check
        #[arg(long, default_value_t = 100)]
        batches: usize,
        /// Pairs per batch
        #[arg(long, default_value_t = 64)]
        pairs: usize,
        /// Grid size for the distance check
        #[arg(long, default_value_t = 16)]
        bins: usize,
        /// Layer sizes for the full-pipeline network check
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 6, 2])]
        net_layers: Vec<usize>,
        /// Pairs in the network check batch
        #[arg(long, default_value_t = 24)]
        net_pairs: usize,
        /// Grid size for the network check
        #[arg(long, default_value_t = 8)]
        net_bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write manifest.json and report.txt here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train an embedding net by descending a histogram loss
    Train {
        /// Data source: idx:<images>,<labels> or blobs:<classes>,<per_class>
        #[arg(long)]
        data: String,
        /// Comma-separated layer sizes after the input layer; default 256,128,2
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<usize>>,
        /// Input dimension for generated blobs
        #[arg(long, default_value_t = 16)]
        blob_dim: usize,
        /// Per-coordinate noise for generated blobs
        #[arg(long, default_value_t = 0.1)]
        blob_spread: f64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        /// Objects per minibatch
        #[arg(long, default_value_t = 256)]
        batch_size: usize,
        /// Cap on pairs drawn from each minibatch
        #[arg(long, default_value_t = 10_000)]
        pairs_per_batch: usize,
        /// Distance bins
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Similarity bins; defaults to --bins
        #[arg(long)]
        bins_sim: Option<usize>,
        /// Adam step size
        #[arg(long, default_value_t = 0.002)]
        lr: f64,
        /// Loss to descend; hl needs --binary-sim
        #[arg(long, value_enum, default_value_t = LossArg::Chl)]
        loss: LossArg,
        /// Binarize similarities to same-class vs different-class
        #[arg(long)]
        binary_sim: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; defaults to $CHL_OUT_DIR, then ./chl-out
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LossArg {
    Chl,
    Hl,
}

fn default_out() -> PathBuf {
    std::env::var_os("CHL_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("chl-out"))
}

fn exit_code_for(err: &chl::Error) -> u8 {
    use chl::Error;
    match err {
        Error::Io(_)
        | Error::Json(_)
        | Error::IdxMagic { .. }
        | Error::IdxTruncated { .. }
        | Error::IdxCountMismatch { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> chl::Result<ExitCode> {
    match cli.command {
        Command::Synth {
            dist,
            bins,
            pairs,
            lr,
            iters,
            snapshots,
            seed,
            out,
        } => {
            let snapshot_steps =
                snapshots.unwrap_or_else(|| OptimizationRun::default_snapshot_steps(iters));
            let out_dir = out.unwrap_or_else(default_out);
            let scenarios: Vec<String> = if dist == "all" {
                SCENARIOS.iter().map(|s| s.to_string()).collect()
            } else {
                vec![dist]
            };
            for scenario in scenarios {
                run_synth(&SynthSpec {
                    scenario,
                    pairs,
                    bins,
                    learning_rate: lr,
                    iterations: iters,
                    snapshot_steps: snapshot_steps.clone(),
                    seed,
                    out_dir: out_dir.clone(),
                })?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck {
            batches,
            pairs,
            bins,
            net_layers,
            net_pairs,
            net_bins,
            seed,
            out,
        } => {
            let spec = GradcheckSpec {
                batches,
                pairs,
                bins,
                net_layers,
                net_pairs,
                net_bins,
                seed,
            };
            let pass = run_gradcheck(&spec, out.as_deref())?;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Train {
            data,
            layers,
            blob_dim,
            blob_spread,
            epochs,
            batch_size,
            pairs_per_batch,
            bins,
            bins_sim,
            lr,
            loss,
            binary_sim,
            seed,
            out,
        } => {
            run_train(&TrainRequest {
                data,
                layers,
                blob_dim,
                blob_spread,
                epochs,
                batch_size,
                pairs_per_batch,
                bins,
                bins_sim: bins_sim.unwrap_or(bins),
                learning_rate: lr,
                loss: match loss {
                    LossArg::Chl => TrainLoss::Chl,
                    LossArg::Hl => TrainLoss::ScaledHl,
                },
                binary_similarity: binary_sim,
                seed,
                out_dir: out.unwrap_or_else(default_out),
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
