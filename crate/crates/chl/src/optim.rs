//! Gradient descent directly on a batch of distances, plus the similarity
//! samplers and minimum checker used by the synthetic studies.
//!
//! Treating each distance as a free variable turns the loss into a function
//! on `[0, 1]^M` whose exact gradient is available from
//! [`loss::chl_grad_distances`](crate::loss::chl_grad_distances). Repeatedly
//! stepping against that gradient (with clamping to the unit interval) shows
//! what the loss alone asks of a distance layout: mass sorts itself so that
//! higher-similarity columns occupy strictly lower distance bins. The
//! [`check_minimum`] structural test recognizes exactly those layouts; it
//! agrees with `chl == 0` by construction of the loss.

use crate::histogram::{build_joint_histogram, cumulative_tables, BinConfig, HistogramGrid, PairBatch};
use crate::loss::{chl, chl_grad_given};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Distribution of ground-truth similarities for a synthetic run.
///
/// The truncated normal is a plain normal restricted to `[0, 1]` by rejection,
/// so its density is renormalized over the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimilarityDistribution {
    Uniform,
    TruncatedNormal { mean: f64, std_dev: f64 },
}

impl SimilarityDistribution {
    /// Similarities concentrated around 0.5.
    pub fn concentrated() -> Self {
        Self::TruncatedNormal {
            mean: 0.5,
            std_dev: 0.3,
        }
    }

    /// Mass piled near 0: most pairs are dissimilar.
    pub fn mostly_dissimilar() -> Self {
        Self::TruncatedNormal {
            mean: 0.0,
            std_dev: 0.3,
        }
    }

    /// Mass piled near 1: most pairs are similar.
    pub fn mostly_similar() -> Self {
        Self::TruncatedNormal {
            mean: 1.0,
            std_dev: 0.3,
        }
    }

    /// Looks up one of the four named scenarios.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "concentrated" => Some(Self::concentrated()),
            "mostly_dissimilar" => Some(Self::mostly_dissimilar()),
            "mostly_similar" => Some(Self::mostly_similar()),
            _ => None,
        }
    }
}

/// Draws `count` similarities from `dist`, deterministically in `seed`.
pub fn sample_similarities(dist: &SimilarityDistribution, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *dist {
        SimilarityDistribution::Uniform => (0..count).map(|_| rng.random()).collect(),
        SimilarityDistribution::TruncatedNormal { mean, std_dev } => {
            assert!(
                std_dev > 0.0 && std_dev.is_finite(),
                "truncated normal needs a positive standard deviation"
            );
            let normal = Normal::new(mean, std_dev).expect("parameters are finite");
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let x = normal.sample(&mut rng);
                if (0.0..=1.0).contains(&x) {
                    out.push(x);
                }
            }
            out
        }
    }
}

/// Draws `count` uniform initial distances on a stream separate from the
/// similarity sampler, so the same seed can drive both without correlation.
pub fn initial_distances(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..count).map(|_| rng.random()).collect()
}

/// A fully specified distance-space descent run.
///
/// `seed` records how the batch was generated; the descent itself is
/// deterministic and never draws randomness.
#[derive(Debug, Clone)]
pub struct OptimizationRun {
    pub batch: PairBatch,
    pub config: BinConfig,
    pub learning_rate: f64,
    pub iterations: usize,
    pub snapshot_steps: Vec<usize>,
    pub seed: u64,
}

impl OptimizationRun {
    /// Validates the hyperparameters: positive finite learning rate, at least
    /// one iteration, and strictly increasing snapshot steps within
    /// `1..=iterations`.
    pub fn new(
        batch: PairBatch,
        config: BinConfig,
        learning_rate: f64,
        iterations: usize,
        snapshot_steps: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive and finite, got {learning_rate}"
            )));
        }
        if iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        for (i, &step) in snapshot_steps.iter().enumerate() {
            if step == 0 || step > iterations {
                return Err(Error::InvalidConfig(format!(
                    "snapshot step {step} outside 1..={iterations}"
                )));
            }
            if i > 0 && snapshot_steps[i - 1] >= step {
                return Err(Error::InvalidConfig(
                    "snapshot steps must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self {
            batch,
            config,
            learning_rate,
            iterations,
            snapshot_steps,
            seed,
        })
    }

    /// The standard snapshot schedule, dropping steps past `iterations`.
    pub fn default_snapshot_steps(iterations: usize) -> Vec<usize> {
        [500, 1000, 3000]
            .into_iter()
            .filter(|&s| s <= iterations)
            .collect()
    }
}

/// What a descent run produced.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Loss before each update plus the final loss: `loss_curve[k]` is the
    /// loss after `k` updates, so the length is `iterations + 1`.
    pub loss_curve: Vec<f64>,
    /// Joint histograms rebuilt from the updated distances at each requested
    /// step, as `(step, grid)`.
    pub snapshots: Vec<(usize, HistogramGrid)>,
    pub final_distances: Vec<f64>,
}

/// Runs plain gradient descent on the distances, clamping every update to
/// `[0, 1]`. Deterministic: no randomness is drawn.
pub fn optimize_distances(run: &OptimizationRun) -> Trajectory {
    let mut batch = run.batch.clone();
    let mut loss_curve = Vec::with_capacity(run.iterations + 1);
    let mut snapshots = Vec::with_capacity(run.snapshot_steps.len());
    let mut next_snapshot = 0;
    for step in 1..=run.iterations {
        let grid = build_joint_histogram(&batch, &run.config);
        loss_curve.push(chl(&grid));
        let grads = chl_grad_given(&batch, &grid);
        for (d, g) in batch.distances_mut().iter_mut().zip(&grads) {
            *d = (*d - run.learning_rate * g).clamp(0.0, 1.0);
        }
        if next_snapshot < run.snapshot_steps.len() && run.snapshot_steps[next_snapshot] == step {
            snapshots.push((step, build_joint_histogram(&batch, &run.config)));
            next_snapshot += 1;
        }
    }
    loss_curve.push(chl(&build_joint_histogram(&batch, &run.config)));
    Trajectory {
        loss_curve,
        snapshots,
        final_distances: batch.distances().to_vec(),
    }
}

/// Verdict of [`check_minimum`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimumCheck {
    pub is_minimum: bool,
    /// Cells `(r, z)` whose loss contribution `h * phi` exceeds the tolerance.
    pub violations: Vec<(usize, usize)>,
}

/// Tests whether a grid is a global minimum of the loss, structurally.
///
/// A grid is minimal exactly when, reading similarity columns left to right,
/// the occupied distance bins strictly decrease: every bin used by a higher
/// similarity column lies strictly below every bin used by any lower one.
/// That implies each occupied distance row touches a single similarity bin.
/// Entries at or below `tolerance` count as empty.
pub fn check_minimum(grid: &HistogramGrid, tolerance: f64) -> MinimumCheck {
    assert!(
        tolerance >= 0.0 && tolerance.is_finite(),
        "tolerance must be a nonnegative finite number"
    );
    let n = grid.config().distance_bins();
    let m = grid.config().similarity_bins();
    let tables = cumulative_tables(grid);

    let mut violations = Vec::new();
    for r in 0..n {
        for z in 0..m {
            if grid.get(r, z) * tables.phi(r, z) > tolerance {
                violations.push((r, z));
            }
        }
    }

    // Occupied row range per similarity column.
    let mut ranges: Vec<Option<(usize, usize)>> = vec![None; m];
    for (z, range) in ranges.iter_mut().enumerate() {
        for r in 0..n {
            if grid.get(r, z) > tolerance {
                let (lo, hi) = range.unwrap_or((r, r));
                *range = Some((lo.min(r), hi.max(r)));
            }
        }
    }
    let mut single_bin_rows = true;
    'rows: for r in 0..n {
        let mut seen = false;
        for z in 0..m {
            if grid.get(r, z) > tolerance {
                if seen {
                    single_bin_rows = false;
                    break 'rows;
                }
                seen = true;
            }
        }
    }
    let mut strictly_decreasing = true;
    let mut min_lower_row = usize::MAX;
    for range in ranges.iter().flatten() {
        let (lo, hi) = *range;
        if hi >= min_lower_row {
            strictly_decreasing = false;
            break;
        }
        min_lower_row = min_lower_row.min(lo);
    }

    MinimumCheck {
        is_minimum: single_bin_rows && strictly_decreasing,
        violations,
    }
}
