//! Differentiable histograms over pairwise distances and similarities, and the
//! losses built on top of them.
//!
//! The central object is a joint histogram: given a batch of pairs, each with a
//! distance `d_i` in `[0, 1]` and a similarity `s_i` in `[0, 1]`, the distance is
//! spread over two adjacent bins with a triangular kernel while the similarity is
//! hard-assigned to its nearest bin. Summing the resulting grid against its own
//! upper-right corner mass gives a scalar that estimates the probability that a
//! more similar pair ends up *farther* apart than a less similar one. That
//! reverse-ordering probability is the continuous histogram loss: it is zero
//! exactly when distances sort pairs by similarity, and because the kernel is
//! piecewise linear it admits exact analytic gradients with respect to every
//! distance in the batch.
//!
//! The crate provides, in roughly bottom-up order:
//!
//! - [`histogram`]: soft distance binning, similarity binning, joint and
//!   per-class histograms, and the cumulative corner tables the losses consume.
//! - [`loss`]: the continuous histogram loss, its variants, the classical binary
//!   histogram loss it generalizes, and exact gradients in both histogram space
//!   and distance space.
//! - [`optim`]: gradient descent directly on a vector of distances, similarity
//!   samplers for synthetic studies, and a structural test for global minima.
//! - [`embed`]: a small feed-forward embedding network with shared-weight pair
//!   handling, backpropagation through the bounded metric, Adam, and a trainer
//!   that minimizes the loss end to end.
//! - [`data`]: IDX image/label loading and a Gaussian-blob generator.
//! - [`gradcheck`]: finite-difference harnesses that validate the analytic
//!   gradients in distance space and in network-parameter space.
//! - [`export`], [`stats`], [`cli`]: CSV/PPM/manifest writers, rank statistics,
//!   and the command layer used by the `chl` binary.
//!
//! Distances live on `[0, 1]` with `n` bin nodes at `r / (n - 1)` and
//! similarities on `[0, 1]` with `m` nodes at `z / (m - 1)`; all bin indices in
//! the API are zero-based.
//!
//! # Example
//!
//! ```
//! use chl::{BinConfig, PairBatch, build_joint_histogram, loss};
//!
//! // Two well-ordered pairs plus a similar pair sitting almost as far out as
//! // the dissimilar one.
//! let batch = PairBatch::new(
//!     vec![0.1, 0.7, 0.65],
//!     vec![1.0, 0.0, 1.0],
//! )?;
//! let bins = BinConfig::new(11, 2)?;
//! let grid = build_joint_histogram(&batch, &bins);
//! let value = loss::chl(&grid);
//! assert!(value > 0.0);
//!
//! // The gradient pushes the misplaced similar pair closer.
//! let grads = loss::chl_grad_distances(&batch, &bins);
//! assert!(grads[2] > 0.0);
//! # Ok::<(), chl::Error>(())
//! ```

pub mod cli;
pub mod data;
pub mod embed;
pub mod export;
pub mod gradcheck;
pub mod histogram;
pub mod loss;
pub mod optim;
pub mod stats;

pub use data::{load_idx, make_blobs, LabeledDataset};
pub use embed::{
    backward_pairs, class_similarity, forward_pairs, train_embedding, AdamState, BoundedEuclidean,
    EmbeddingNet, NetGradients, PairForward, SimilarityRule, TrainConfig, TrainLoss, TrainOutcome,
};
pub use histogram::{
    build_binary_histograms, build_joint_histogram, cumulative_tables, similarity_bin, soft_assign,
    BinConfig, BinaryHistograms, CumulativeTables, HistogramGrid, PairBatch, SoftAssign,
};
pub use optim::{
    check_minimum, initial_distances, optimize_distances, sample_similarities, MinimumCheck,
    OptimizationRun, SimilarityDistribution, Trajectory,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A distance or similarity fell outside `[0, 1]` (or was NaN).
    #[error("{what} {value} outside the unit interval")]
    OutOfRange { what: &'static str, value: f64 },

    /// Two sequences that must have equal lengths did not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A batch of pairs must contain at least one pair.
    #[error("batch contains no pairs")]
    EmptyBatch,

    /// Bin counts must both be at least 2.
    #[error("invalid bin configuration: n={n}, m={m} (both must be >= 2)")]
    InvalidBins { n: usize, m: usize },

    /// Binary-histogram construction saw a similarity other than exactly 0 or 1.
    #[error("similarity {value} is not binary (expected exactly 0.0 or 1.0)")]
    NonBinarySimilarity { value: f64 },

    /// Binary-histogram construction needs at least one pair of each class.
    #[error("batch has no {0} pairs")]
    MissingClass(&'static str),

    /// A class label was out of range for the declared number of classes.
    #[error("label {label} out of range for {num_classes} classes")]
    InvalidLabel { label: usize, num_classes: usize },

    /// An input vector did not match the network's input dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A forward cache was used after the network parameters changed.
    #[error("forward cache is stale: network parameters changed since the forward pass")]
    StaleCache,

    /// A configuration value violated a documented constraint.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An IDX file had the wrong magic number.
    #[error("bad IDX magic: expected {expected:#010x}, got {got:#010x}")]
    IdxMagic { expected: u32, got: u32 },

    /// An IDX file ended before its declared payload.
    #[error("truncated IDX file: needed {needed} bytes, got {got}")]
    IdxTruncated { needed: usize, got: usize },

    /// Image and label IDX files disagreed on the record count.
    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    /// A `--data` source string could not be parsed.
    #[error("invalid data source: {0}")]
    DataSource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
