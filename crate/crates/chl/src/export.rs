//! File formats produced by the command layer: CSV tables, PPM heatmaps, and
//! JSON run manifests.
//!
//! CSV floats are printed with 16 significant digits in scientific notation,
//! which is locale-independent and deterministic. Manifests serialize through
//! JSON with shortest-round-trip floats, so reading one back yields exactly
//! the values that produced the run.

use crate::histogram::HistogramGrid;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Version string stamped into every manifest.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 16 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.15e}")
}

/// Writes a grid as CSV: a `# n=<n> m=<m>` header line, then one row per
/// distance bin with `m` comma-separated values.
pub fn write_grid_csv(path: &Path, grid: &HistogramGrid) -> Result<()> {
    let n = grid.config().distance_bins();
    let m = grid.config().similarity_bins();
    let mut out = String::new();
    writeln!(out, "# n={n} m={m}").expect("string write");
    for r in 0..n {
        let row: Vec<String> = (0..m).map(|z| format_float(grid.get(r, z))).collect();
        writeln!(out, "{}", row.join(",")).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a loss curve as `iteration,loss` rows; iteration 0 is the loss
/// before the first update.
pub fn write_loss_csv(path: &Path, losses: &[f64]) -> Result<()> {
    let mut out = String::from("iteration,loss\n");
    for (k, &l) in losses.iter().enumerate() {
        writeln!(out, "{k},{}", format_float(l)).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes per-epoch mean losses as `epoch,loss` rows, epochs numbered from 1.
pub fn write_epoch_loss_csv(path: &Path, losses: &[f64]) -> Result<()> {
    let mut out = String::from("epoch,loss\n");
    for (k, &l) in losses.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, format_float(l)).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes embeddings as `index,label,e1,...,e<k>` rows.
pub fn write_embedding_csv(
    path: &Path,
    labels: &[usize],
    embeddings: &[Vec<f64>],
) -> Result<()> {
    assert_eq!(labels.len(), embeddings.len(), "one label per embedding");
    let dim = embeddings.first().map_or(0, |e| e.len());
    let mut out = String::from("index,label");
    for k in 1..=dim {
        write!(out, ",e{k}").expect("string write");
    }
    out.push('\n');
    for (i, (label, emb)) in labels.iter().zip(embeddings).enumerate() {
        write!(out, "{i},{label}").expect("string write");
        for &v in emb {
            write!(out, ",{}", format_float(v)).expect("string write");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a grid as a binary grayscale PPM (P5) heatmap, one pixel per bin.
///
/// Rows are distance bins (so distance grows downward), columns similarity
/// bins; intensities are normalized to the grid's maximum entry.
pub fn write_grid_ppm(path: &Path, grid: &HistogramGrid) -> Result<()> {
    let n = grid.config().distance_bins();
    let m = grid.config().similarity_bins();
    let max = grid.values().iter().cloned().fold(0.0, f64::max);
    let mut bytes = format!("P5\n{m} {n}\n255\n").into_bytes();
    for r in 0..n {
        for z in 0..m {
            let v = if max > 0.0 {
                (grid.get(r, z) / max * 255.0).round() as u8
            } else {
                0
            };
            bytes.push(v);
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Everything needed to reproduce a run bit-identically with the same binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub command: CommandSpec,
}

impl RunManifest {
    pub fn new(command: CommandSpec) -> Self {
        Self {
            version: TOOL_VERSION.to_string(),
            command,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = self.to_json()?;
        json.push('\n');
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The command a manifest describes, with every hyperparameter it accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandSpec {
    Synth(SynthSpec),
    Gradcheck(GradcheckSpec),
    Train(TrainSpec),
}

/// One synthetic descent scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// One of `uniform`, `concentrated`, `mostly_dissimilar`, `mostly_similar`.
    pub scenario: String,
    pub pairs: usize,
    /// Square grid size.
    pub bins: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub snapshot_steps: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Finite-difference verification settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckSpec {
    pub batches: usize,
    pub pairs: usize,
    pub bins: usize,
    pub net_layers: Vec<usize>,
    pub net_pairs: usize,
    pub net_bins: usize,
    pub seed: u64,
}

/// An embedding-training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    /// `idx:<images>,<labels>` or `blobs:<classes>,<per_class>`.
    pub data: String,
    pub blob_dim: usize,
    pub blob_spread: f64,
    /// Resolved layer sizes, input through output.
    pub layers: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub pairs_per_batch: usize,
    pub bins: usize,
    pub bins_sim: usize,
    pub learning_rate: f64,
    /// `chl` or `hl`.
    pub loss: String,
    pub binary_similarity: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}
