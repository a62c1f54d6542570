//! Finite-difference validation of the analytic gradients.
//!
//! Two harnesses: one compares `chl_grad_distances` against central
//! differences of the loss over individual distances, the other perturbs
//! every network parameter and compares against backpropagation through the
//! full pipeline (forward, histogram, loss, backward).
//!
//! Comparisons use a relative error with an absolute floor: a discrepancy
//! passes when `|a - fd| <= max(rel_tolerance * max(|a|, |fd|), abs_floor)`.
//! The floor matters for pairs whose analytic gradient is exactly zero (empty
//! neighborhoods): the loss is locally constant there, but evaluating it twice
//! still leaves rounding residue of order 1e-16 / step in the difference
//! quotient.
//!
//! Batches are sampled bin-interior on purpose. The loss is piecewise linear
//! in each distance with kinks at the bin nodes, so a central difference that
//! straddles a node measures the average of two different slopes; keeping a
//! margin around every node makes the finite difference exact up to rounding.

use crate::embed::{backward_pairs, forward_pairs, BoundedEuclidean, EmbeddingNet};
use crate::histogram::{build_joint_histogram, BinConfig, PairBatch};
use crate::loss::{chl, chl_grad_distances};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Configuration of the distance-space check.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCheckConfig {
    pub batches: usize,
    /// Pairs per batch.
    pub pairs: usize,
    /// Square grid size (distance and similarity bins).
    pub bins: usize,
    pub fd_step: f64,
    pub rel_tolerance: f64,
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for DistanceCheckConfig {
    fn default() -> Self {
        Self {
            batches: 100,
            pairs: 64,
            bins: 16,
            fd_step: 1e-7,
            rel_tolerance: 1e-5,
            abs_floor: 1e-9,
            seed: 0,
        }
    }
}

/// Configuration of the network-space check.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCheckConfig {
    pub layer_sizes: Vec<usize>,
    pub pairs: usize,
    pub bins: usize,
    pub fd_step: f64,
    pub rel_tolerance: f64,
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for NetworkCheckConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![8, 6, 2],
            pairs: 24,
            bins: 8,
            fd_step: 1e-6,
            rel_tolerance: 1e-4,
            abs_floor: 1e-8,
            seed: 0,
        }
    }
}

/// Outcome of a finite-difference sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    pub comparisons: usize,
    /// Worst `|a - fd| / max(|a|, |fd|, abs_floor / rel_tolerance)`.
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub rel_tolerance: f64,
    pub pass: bool,
}

struct ErrTracker {
    floor: f64,
    comparisons: usize,
    max_rel: f64,
    max_abs: f64,
}

impl ErrTracker {
    fn new(rel_tolerance: f64, abs_floor: f64) -> Self {
        Self {
            floor: abs_floor / rel_tolerance,
            comparisons: 0,
            max_rel: 0.0,
            max_abs: 0.0,
        }
    }

    fn record(&mut self, analytic: f64, fd: f64) {
        let abs = (analytic - fd).abs();
        let rel = abs / analytic.abs().max(fd.abs()).max(self.floor);
        self.comparisons += 1;
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(rel);
    }

    fn report(self, rel_tolerance: f64) -> CheckReport {
        CheckReport {
            comparisons: self.comparisons,
            max_rel_err: self.max_rel,
            max_abs_err: self.max_abs,
            rel_tolerance,
            pass: self.max_rel <= rel_tolerance,
        }
    }
}

fn validate_common(
    bins: usize,
    fd_step: f64,
    rel_tolerance: f64,
    abs_floor: f64,
) -> Result<BinConfig> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidConfig("fd_step must be positive".into()));
    }
    if !(rel_tolerance > 0.0 && abs_floor > 0.0) {
        return Err(Error::InvalidConfig(
            "tolerances must be positive".into(),
        ));
    }
    BinConfig::square(bins)
}

/// Samples a batch that keeps every distance at least 5% of a bin width away
/// from the surrounding nodes and every similarity at least 10% of a bin away
/// from a rounding boundary.
pub fn interior_batch(pairs: usize, config: &BinConfig, rng: &mut ChaCha8Rng) -> PairBatch {
    let n = config.distance_bins();
    let m = config.similarity_bins();
    let distances = (0..pairs)
        .map(|_| {
            let segment = rng.random_range(0..n - 1);
            (segment as f64 + rng.random_range(0.05..0.95)) * config.delta_d()
        })
        .collect();
    let similarities = (0..pairs)
        .map(|_| {
            let z = rng.random_range(0..m);
            let jitter = rng.random_range(-0.4..0.4);
            ((z as f64 + jitter) * config.delta_s()).clamp(0.0, 1.0)
        })
        .collect();
    PairBatch::new(distances, similarities).expect("in range by construction")
}

fn loss_at(distances: &[f64], similarities: &[f64], config: &BinConfig) -> f64 {
    let batch = PairBatch::new(distances.to_vec(), similarities.to_vec())
        .expect("perturbed batch stays in range");
    chl(&build_joint_histogram(&batch, config))
}

/// Checks an arbitrary distance-gradient implementation against central
/// finite differences of the loss. Exposed with the gradient as a closure so
/// a deliberately broken gradient can be shown to fail.
pub fn check_distance_gradients_with<F>(
    cfg: &DistanceCheckConfig,
    grad_fn: F,
) -> Result<CheckReport>
where
    F: Fn(&PairBatch, &BinConfig) -> Vec<f64>,
{
    if cfg.batches == 0 || cfg.pairs == 0 {
        return Err(Error::InvalidConfig(
            "batches and pairs must be at least 1".into(),
        ));
    }
    let config = validate_common(cfg.bins, cfg.fd_step, cfg.rel_tolerance, cfg.abs_floor)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = ErrTracker::new(cfg.rel_tolerance, cfg.abs_floor);
    for _ in 0..cfg.batches {
        let batch = interior_batch(cfg.pairs, &config, &mut rng);
        let analytic = grad_fn(&batch, &config);
        let mut work = batch.distances().to_vec();
        for i in 0..batch.len() {
            let d = work[i];
            work[i] = d + cfg.fd_step;
            let up = loss_at(&work, batch.similarities(), &config);
            work[i] = d - cfg.fd_step;
            let down = loss_at(&work, batch.similarities(), &config);
            work[i] = d;
            let fd = (up - down) / (2.0 * cfg.fd_step);
            tracker.record(analytic[i], fd);
        }
    }
    Ok(tracker.report(cfg.rel_tolerance))
}

/// Checks [`chl_grad_distances`] against finite differences.
pub fn check_distance_gradients(cfg: &DistanceCheckConfig) -> Result<CheckReport> {
    check_distance_gradients_with(cfg, chl_grad_distances)
}

/// Checks backpropagated parameter gradients of the full pipeline against
/// central finite differences of the loss over every network parameter.
///
/// Input batches are resampled (deterministically) until every pair distance
/// clears a small node margin, so the parameter perturbations never push a
/// distance across a bin node.
pub fn check_network_gradients(cfg: &NetworkCheckConfig) -> Result<CheckReport> {
    if cfg.pairs == 0 {
        return Err(Error::InvalidConfig("pairs must be at least 1".into()));
    }
    let config = validate_common(cfg.bins, cfg.fd_step, cfg.rel_tolerance, cfg.abs_floor)?;
    let metric = BoundedEuclidean;
    let n = config.distance_bins();

    // Node margin in segment units; parameter steps move a distance by
    // O(fd_step), far less than margin * delta_d.
    let margin = 1e-3;
    let mut found = None;
    for attempt in 0..1000u64 {
        let seed = cfg.seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(7);
        let net = EmbeddingNet::new(&cfg.layer_sizes, seed)?;
        let inputs: Vec<Vec<f64>> = (0..cfg.pairs * 2)
            .map(|_| {
                (0..net.input_dim())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let similarities: Vec<f64> = (0..cfg.pairs)
            .map(|_| {
                let z = rng.random_range(0..config.similarity_bins());
                let jitter = rng.random_range(-0.4..0.4);
                ((z as f64 + jitter) * config.delta_s()).clamp(0.0, 1.0)
            })
            .collect();
        let pair_refs: Vec<(&[f64], &[f64])> = (0..cfg.pairs)
            .map(|p| (inputs[2 * p].as_slice(), inputs[2 * p + 1].as_slice()))
            .collect();
        let forward = forward_pairs(&net, &metric, &pair_refs)?;
        let clear = forward.distances().iter().all(|&d| {
            let scaled = d * (n - 1) as f64;
            let to_node = (scaled - scaled.round()).abs();
            to_node > margin && d > 0.0
        });
        if clear {
            found = Some((net, inputs, similarities));
            break;
        }
    }
    let (net, inputs, similarities) = found.ok_or_else(|| {
        Error::InvalidConfig("could not sample a batch clear of bin nodes".into())
    })?;
    let pair_refs: Vec<(&[f64], &[f64])> = (0..cfg.pairs)
        .map(|p| (inputs[2 * p].as_slice(), inputs[2 * p + 1].as_slice()))
        .collect();

    let loss_of = |net: &EmbeddingNet| -> Result<f64> {
        let fwd = forward_pairs(net, &metric, &pair_refs)?;
        let batch = PairBatch::new(fwd.distances().to_vec(), similarities.clone())?;
        Ok(chl(&build_joint_histogram(&batch, &config)))
    };

    let forward = forward_pairs(&net, &metric, &pair_refs)?;
    let batch = PairBatch::new(forward.distances().to_vec(), similarities.clone())?;
    let dl_dd = chl_grad_distances(&batch, &config);
    let analytic = backward_pairs(&net, &metric, &forward, &dl_dd)?.flat();

    let mut tracker = ErrTracker::new(cfg.rel_tolerance, cfg.abs_floor);
    let mut probe = net.clone();
    for (idx, &a) in analytic.iter().enumerate() {
        let theta = net.param(idx);
        probe.set_param(idx, theta + cfg.fd_step);
        let up = loss_of(&probe)?;
        probe.set_param(idx, theta - cfg.fd_step);
        let down = loss_of(&probe)?;
        probe.set_param(idx, theta);
        let fd = (up - down) / (2.0 * cfg.fd_step);
        tracker.record(a, fd);
    }
    Ok(tracker.report(cfg.rel_tolerance))
}
