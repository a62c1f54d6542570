//! The command layer behind the `chl` binary.
//!
//! Each command writes its outputs under a run directory together with a
//! `manifest.json` holding every hyperparameter, so a run can be reproduced
//! bit-identically by replaying the manifest with the same binary.

use crate::data::{load_idx, make_blobs, LabeledDataset};
use crate::embed::{train_embedding, SimilarityRule, TrainConfig, TrainLoss};
use crate::export::{
    write_embedding_csv, write_epoch_loss_csv, write_grid_csv, write_grid_ppm, write_loss_csv,
    CommandSpec, GradcheckSpec, RunManifest, SynthSpec, TrainSpec,
};
use crate::gradcheck::{
    check_distance_gradients, check_network_gradients, CheckReport, DistanceCheckConfig,
    NetworkCheckConfig,
};
use crate::histogram::{build_joint_histogram, BinConfig, PairBatch};
use crate::optim::{
    check_minimum, initial_distances, optimize_distances, sample_similarities, OptimizationRun,
    SimilarityDistribution,
};
use crate::{Error, Result};
use std::path::{Path, PathBuf};

/// Scenario names accepted by `synth`, in the order `all` runs them.
pub const SCENARIOS: [&str; 4] = [
    "uniform",
    "concentrated",
    "mostly_dissimilar",
    "mostly_similar",
];

/// Runs one synthetic descent scenario and writes its artifacts under
/// `<out_dir>/<scenario>/`: `loss.csv`, `snapshot_<step>.csv` and `.ppm` for
/// each requested step, `snapshot_final.csv` and `.ppm`, and `manifest.json`.
pub fn run_synth(spec: &SynthSpec) -> Result<()> {
    let dist = SimilarityDistribution::from_name(&spec.scenario).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "unknown scenario '{}'; expected one of: {}",
            spec.scenario,
            SCENARIOS.join(", ")
        ))
    })?;
    let config = BinConfig::new(spec.bins, spec.bins)?;
    let similarities = sample_similarities(&dist, spec.pairs, spec.seed);
    let distances = initial_distances(spec.pairs, spec.seed);
    let batch = PairBatch::new(distances, similarities)?;
    let run = OptimizationRun::new(
        batch,
        config,
        spec.learning_rate,
        spec.iterations,
        spec.snapshot_steps.clone(),
        spec.seed,
    )?;
    let trajectory = optimize_distances(&run);

    let dir = spec.out_dir.join(&spec.scenario);
    std::fs::create_dir_all(&dir)?;
    write_loss_csv(&dir.join("loss.csv"), &trajectory.loss_curve)?;
    for (step, grid) in &trajectory.snapshots {
        write_grid_csv(&dir.join(format!("snapshot_{step}.csv")), grid)?;
        write_grid_ppm(&dir.join(format!("snapshot_{step}.ppm")), grid)?;
    }
    let final_batch = PairBatch::new(
        trajectory.final_distances.clone(),
        run.batch.similarities().to_vec(),
    )?;
    let final_grid = build_joint_histogram(&final_batch, &config);
    write_grid_csv(&dir.join("snapshot_final.csv"), &final_grid)?;
    write_grid_ppm(&dir.join("snapshot_final.ppm"), &final_grid)?;
    RunManifest::new(CommandSpec::Synth(spec.clone())).write(&dir.join("manifest.json"))?;

    let initial = trajectory.loss_curve[0];
    let last = *trajectory.loss_curve.last().expect("nonempty curve");
    let minimum = check_minimum(&final_grid, 1e-12);
    println!(
        "{}: loss {:.6e} -> {:.6e} after {} iterations (exact minimum: {}), wrote {}",
        spec.scenario,
        initial,
        last,
        spec.iterations,
        minimum.is_minimum,
        dir.display()
    );
    Ok(())
}

fn report_line(name: &str, report: &CheckReport) -> String {
    format!(
        "{name} gradients: {} ({} comparisons, max rel err {:.3e}, max abs err {:.3e}, tolerance {:.1e})",
        if report.pass { "PASS" } else { "FAIL" },
        report.comparisons,
        report.max_rel_err,
        report.max_abs_err,
        report.rel_tolerance
    )
}

/// Runs both finite-difference checks, prints the manifest and a line per
/// check to stdout, and returns whether both passed. With `out` set, also
/// writes `manifest.json` and `report.txt` there.
pub fn run_gradcheck(spec: &GradcheckSpec, out: Option<&Path>) -> Result<bool> {
    let distance_cfg = DistanceCheckConfig {
        batches: spec.batches,
        pairs: spec.pairs,
        bins: spec.bins,
        seed: spec.seed,
        ..DistanceCheckConfig::default()
    };
    let network_cfg = NetworkCheckConfig {
        layer_sizes: spec.net_layers.clone(),
        pairs: spec.net_pairs,
        bins: spec.net_bins,
        seed: spec.seed,
        ..NetworkCheckConfig::default()
    };
    let distance = check_distance_gradients(&distance_cfg)?;
    let network = check_network_gradients(&network_cfg)?;

    let manifest = RunManifest::new(CommandSpec::Gradcheck(spec.clone()));
    println!("{}", manifest.to_json()?);
    let lines = format!(
        "{}\n{}\n",
        report_line("distance", &distance),
        report_line("network", &network)
    );
    print!("{lines}");

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        manifest.write(&dir.join("manifest.json"))?;
        std::fs::write(dir.join("report.txt"), lines)?;
    }
    Ok(distance.pass && network.pass)
}

/// What `train` needs beyond the manifest: the layer list is still relative
/// to the not-yet-loaded dataset, so input size resolution happens here.
#[derive(Debug, Clone)]
pub struct TrainRequest {
    /// `idx:<images>,<labels>` or `blobs:<classes>,<per_class>`.
    pub data: String,
    /// Layer sizes after the input layer; `None` selects 256, 128, 2.
    pub layers: Option<Vec<usize>>,
    /// Input dimension for generated blobs.
    pub blob_dim: usize,
    /// Per-coordinate noise for generated blobs.
    pub blob_spread: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub pairs_per_batch: usize,
    pub bins: usize,
    pub bins_sim: usize,
    pub learning_rate: f64,
    pub loss: TrainLoss,
    pub binary_similarity: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Loads a dataset from a source string: `idx:<images>,<labels>` reads the
/// big-endian IDX pair, `blobs:<classes>,<per_class>` generates Gaussian
/// clusters with the given dimension, spread, and seed.
pub fn parse_data_source(
    source: &str,
    blob_dim: usize,
    blob_spread: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if let Some(rest) = source.strip_prefix("idx:") {
        let (images, labels) = rest.split_once(',').ok_or_else(|| {
            Error::DataSource(format!(
                "idx source needs two comma-separated paths, got '{rest}'"
            ))
        })?;
        return load_idx(Path::new(images), Path::new(labels));
    }
    if let Some(rest) = source.strip_prefix("blobs:") {
        let (classes, per_class) = rest.split_once(',').ok_or_else(|| {
            Error::DataSource(format!(
                "blobs source needs <classes>,<per_class>, got '{rest}'"
            ))
        })?;
        let classes: usize = classes
            .trim()
            .parse()
            .map_err(|_| Error::DataSource(format!("bad class count '{classes}'")))?;
        let per_class: usize = per_class
            .trim()
            .parse()
            .map_err(|_| Error::DataSource(format!("bad per-class count '{per_class}'")))?;
        return make_blobs(classes, per_class, blob_dim, blob_spread, seed);
    }
    Err(Error::DataSource(format!(
        "unrecognized data source '{source}'; expected idx:<images>,<labels> or blobs:<classes>,<per_class>"
    )))
}

/// Trains an embedding net and writes `epoch_loss.csv`, `embedding.csv` for
/// the whole dataset, and `manifest.json` under the run's output directory.
pub fn run_train(request: &TrainRequest) -> Result<()> {
    if request.loss == TrainLoss::ScaledHl && !request.binary_similarity {
        return Err(Error::InvalidConfig(
            "the hl loss needs binary similarities; pass --binary-sim".into(),
        ));
    }
    let dataset = parse_data_source(
        &request.data,
        request.blob_dim,
        request.blob_spread,
        request.seed,
    )?;
    let mut layers = vec![dataset.input_dim()];
    layers.extend(
        request
            .layers
            .clone()
            .unwrap_or_else(|| vec![256, 128, 2]),
    );

    let config = TrainConfig {
        epochs: request.epochs,
        batch_size: request.batch_size,
        pairs_per_batch: request.pairs_per_batch,
        distance_bins: request.bins,
        similarity_bins: request.bins_sim,
        learning_rate: request.learning_rate,
        loss: request.loss,
        similarity: if request.binary_similarity {
            SimilarityRule::SameClass
        } else {
            SimilarityRule::ClassDistance
        },
        seed: request.seed,
    };
    let outcome = train_embedding(&dataset, &layers, &config)?;

    std::fs::create_dir_all(&request.out_dir)?;
    write_epoch_loss_csv(&request.out_dir.join("epoch_loss.csv"), &outcome.epoch_losses)?;
    let mut embeddings = Vec::with_capacity(dataset.len());
    for i in 0..dataset.len() {
        embeddings.push(outcome.net.embed(dataset.input(i))?);
    }
    write_embedding_csv(
        &request.out_dir.join("embedding.csv"),
        dataset.labels(),
        &embeddings,
    )?;
    let spec = TrainSpec {
        data: request.data.clone(),
        blob_dim: request.blob_dim,
        blob_spread: request.blob_spread,
        layers,
        epochs: request.epochs,
        batch_size: request.batch_size,
        pairs_per_batch: request.pairs_per_batch,
        bins: request.bins,
        bins_sim: request.bins_sim,
        learning_rate: request.learning_rate,
        loss: match request.loss {
            TrainLoss::Chl => "chl".into(),
            TrainLoss::ScaledHl => "hl".into(),
        },
        binary_similarity: request.binary_similarity,
        seed: request.seed,
        out_dir: request.out_dir.clone(),
    };
    RunManifest::new(CommandSpec::Train(spec)).write(&request.out_dir.join("manifest.json"))?;

    for (epoch, loss) in outcome.epoch_losses.iter().enumerate() {
        println!("epoch {}: loss {:.6e}", epoch + 1, loss);
    }
    println!(
        "trained on {} samples ({} classes), wrote {}",
        dataset.len(),
        dataset.num_classes(),
        request.out_dir.display()
    );
    Ok(())
}
