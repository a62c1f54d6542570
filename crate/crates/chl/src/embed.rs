//! A small feed-forward embedding network trained against the histogram loss.
//!
//! Objects are mapped through fully connected layers with ELU activations
//! (the last layer stays linear), pair distances come from the bounded metric
//! `d = e / (1 + e)` over the Euclidean embedding distance `e`, and the loss
//! modules turn a batch of pair distances and class-derived similarities into
//! a scalar with exact distance gradients. This module closes the loop: it
//! backpropagates those distance gradients through both branches of each pair
//! (the branches share every weight, so their contributions add) and applies
//! Adam updates.
//!
//! Forward passes cache per-object pre-activations keyed to a network version
//! counter; using a cache after any parameter change is an error rather than a
//! silent wrong gradient.

use crate::data::LabeledDataset;
use crate::histogram::{build_binary_histograms, build_joint_histogram, BinConfig, PairBatch};
use crate::loss::{chl, chl_grad_given, histogram_loss, hl_grad_distances};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ELU with unit scale: `z` for positive inputs, `exp(z) - 1` otherwise.
pub fn elu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        z.exp() - 1.0
    }
}

/// Derivative of [`elu`].
pub fn elu_deriv(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        z.exp()
    }
}

/// The bounded metric `d = e / (1 + e)` over Euclidean embedding distance.
/// Values always land in `[0, 1)`, which is what the histogram grid expects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoundedEuclidean;

impl BoundedEuclidean {
    /// Plain Euclidean distance between two embeddings.
    pub fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Squashes a raw distance into `[0, 1)`.
    pub fn bound(&self, e: f64) -> f64 {
        e / (1.0 + e)
    }

    /// Derivative of [`bound`]: `1 / (1 + e)^2`.
    pub fn bound_deriv(&self, e: f64) -> f64 {
        let t = 1.0 + e;
        1.0 / (t * t)
    }

    /// Bounded distance between two embeddings.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.bound(self.raw_distance(a, b))
    }
}

/// Fully connected embedding network; hidden layers use ELU, the output layer
/// is linear. Weights initialize uniformly in `+-sqrt(6 / (fan_in + fan_out))`
/// and biases at zero, deterministically in the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingNet {
    layer_sizes: Vec<usize>,
    /// `weights[l]` is row-major `(out, in)`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    /// Bumped on every mutation so forward caches can detect staleness.
    version: u64,
}

impl EmbeddingNet {
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(
                "a network needs an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig("layer sizes must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            version: 0,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weight layers.
    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn weight(&self, layer: usize, out: usize, input: usize) -> f64 {
        self.weights[layer][out * self.layer_sizes[layer] + input]
    }

    pub fn bias(&self, layer: usize, out: usize) -> f64 {
        self.biases[layer][out]
    }

    /// Embeds one input vector.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_object(x)?.activations.pop_value())
    }

    fn forward_object(&self, x: &[f64]) -> Result<ObjectCache> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let layers = self.num_layers();
        let mut preacts = Vec::with_capacity(layers);
        let mut activations = Vec::with_capacity(layers);
        let mut current: &[f64] = x;
        for l in 0..layers {
            let fan_in = self.layer_sizes[l];
            let w = &self.weights[l];
            let mut z = self.biases[l].clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                *zo += row.iter().zip(current).map(|(a, b)| a * b).sum::<f64>();
            }
            let a = if l + 1 == layers {
                z.clone()
            } else {
                z.iter().map(|&v| elu(v)).collect()
            };
            preacts.push(z);
            activations.push(a);
            current = activations.last().unwrap();
        }
        Ok(ObjectCache {
            input: x.to_vec(),
            preacts,
            activations: ActStack(activations),
        })
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum()
    }

    /// Reads parameter `idx` in flat order: layer by layer, weights before
    /// biases. Panics if out of range.
    pub fn param(&self, mut idx: usize) -> f64 {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if idx < w.len() {
                return w[idx];
            }
            idx -= w.len();
            if idx < b.len() {
                return b[idx];
            }
            idx -= b.len();
        }
        panic!("parameter index out of range");
    }

    /// Writes parameter `idx` (same order as [`param`]) and invalidates
    /// outstanding forward caches.
    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        self.version += 1;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            if idx < w.len() {
                w[idx] = value;
                return;
            }
            idx -= w.len();
            if idx < b.len() {
                b[idx] = value;
                return;
            }
            idx -= b.len();
        }
        panic!("parameter index out of range");
    }
}

/// Newtype so `embed` can pop the final activation without cloning.
#[derive(Debug, Clone)]
struct ActStack(Vec<Vec<f64>>);

impl ActStack {
    fn pop_value(mut self) -> Vec<f64> {
        self.0.pop().expect("network has at least one layer")
    }

    fn last(&self) -> &[f64] {
        self.0.last().expect("network has at least one layer")
    }

    fn get(&self, l: usize) -> &[f64] {
        &self.0[l]
    }
}

#[derive(Debug, Clone)]
struct ObjectCache {
    input: Vec<f64>,
    preacts: Vec<Vec<f64>>,
    activations: ActStack,
}

impl ObjectCache {
    fn embedding(&self) -> &[f64] {
        self.activations.last()
    }
}

/// Cached forward pass over a batch of pairs.
#[derive(Debug, Clone)]
pub struct PairForward {
    distances: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    objects: Vec<ObjectCache>,
    net_version: u64,
}

impl PairForward {
    /// Bounded distance of each pair, in input order.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }
}

/// Runs both branches of every pair through the network and caches the
/// activations needed for [`backward_pairs`].
pub fn forward_pairs(
    net: &EmbeddingNet,
    metric: &BoundedEuclidean,
    pairs: &[(&[f64], &[f64])],
) -> Result<PairForward> {
    let mut inputs = Vec::with_capacity(pairs.len() * 2);
    for (a, b) in pairs {
        inputs.push(*a);
        inputs.push(*b);
    }
    let index_pairs = (0..pairs.len()).map(|p| (2 * p, 2 * p + 1)).collect();
    forward_indexed(net, metric, &inputs, index_pairs)
}

/// Forward pass where pairs index into a shared object list, so each object
/// is pushed through the network once no matter how many pairs touch it.
pub(crate) fn forward_indexed(
    net: &EmbeddingNet,
    metric: &BoundedEuclidean,
    inputs: &[&[f64]],
    pairs: Vec<(usize, usize)>,
) -> Result<PairForward> {
    let mut objects = Vec::with_capacity(inputs.len());
    for x in inputs {
        objects.push(net.forward_object(x)?);
    }
    let distances = pairs
        .iter()
        .map(|&(i, j)| metric.distance(objects[i].embedding(), objects[j].embedding()))
        .collect();
    Ok(PairForward {
        distances,
        pairs,
        objects,
        net_version: net.version(),
    })
}

/// Gradients with the same shape as a network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl NetGradients {
    fn zeros_like(net: &EmbeddingNet) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Row-major `(out, in)` weight gradients per layer.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Flat view in the same order as [`EmbeddingNet::param`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// Backpropagates per-pair loss-vs-distance gradients into parameter space.
///
/// For a pair with embeddings `u`, `v` and raw distance `e = |u - v|`, the
/// upstream value `dl_dd[p]` is scaled by the bound derivative and split onto
/// the branches as `+-(u - v) / e`; both branches share weights so everything
/// accumulates into one gradient. Pairs with `e = 0` contribute nothing (the
/// metric has no direction there). Fails if the cache no longer matches the
/// network or the gradient count does not match the pair count.
pub fn backward_pairs(
    net: &EmbeddingNet,
    metric: &BoundedEuclidean,
    forward: &PairForward,
    dl_dd: &[f64],
) -> Result<NetGradients> {
    if forward.net_version != net.version() {
        return Err(Error::StaleCache);
    }
    if dl_dd.len() != forward.pairs.len() {
        return Err(Error::LengthMismatch {
            left: dl_dd.len(),
            right: forward.pairs.len(),
        });
    }

    // Loss gradient with respect to each object's embedding.
    let dim = net.output_dim();
    let mut dl_demb = vec![vec![0.0; dim]; forward.objects.len()];
    for (&(i, j), &g) in forward.pairs.iter().zip(dl_dd) {
        let u = forward.objects[i].embedding();
        let v = forward.objects[j].embedding();
        let e = metric.raw_distance(u, v);
        if e == 0.0 {
            continue;
        }
        let scale = g * metric.bound_deriv(e) / e;
        for k in 0..dim {
            let diff = u[k] - v[k];
            dl_demb[i][k] += scale * diff;
            dl_demb[j][k] -= scale * diff;
        }
    }

    let mut grads = NetGradients::zeros_like(net);
    for (object, demb) in forward.objects.iter().zip(&dl_demb) {
        if demb.iter().all(|&g| g == 0.0) {
            continue;
        }
        backprop_object(net, object, demb, &mut grads);
    }
    Ok(grads)
}

fn backprop_object(
    net: &EmbeddingNet,
    object: &ObjectCache,
    dl_demb: &[f64],
    grads: &mut NetGradients,
) {
    let layers = net.num_layers();
    // Output layer is linear, so its delta is the embedding gradient itself.
    let mut delta = dl_demb.to_vec();
    for l in (0..layers).rev() {
        let fan_in = net.layer_sizes[l];
        let prev: &[f64] = if l == 0 {
            &object.input
        } else {
            object.activations.get(l - 1)
        };
        {
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for (o, &d) in delta.iter().enumerate() {
                let row = &mut gw[o * fan_in..(o + 1) * fan_in];
                for (slot, &p) in row.iter_mut().zip(prev) {
                    *slot += d * p;
                }
                gb[o] += d;
            }
        }
        if l > 0 {
            let w = &net.weights[l];
            let pre = &object.preacts[l - 1];
            let mut next = vec![0.0; fan_in];
            for (o, &d) in delta.iter().enumerate() {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                for (slot, &wv) in next.iter_mut().zip(row) {
                    *slot += d * wv;
                }
            }
            for (slot, &z) in next.iter_mut().zip(pre) {
                *slot *= elu_deriv(z);
            }
            delta = next;
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

/// Adam optimizer state (first and second moments, bias-corrected).
#[derive(Debug, Clone)]
pub struct AdamState {
    learning_rate: f64,
    step: u64,
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(net: &EmbeddingNet, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            step: 0,
            m_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Applies one bias-corrected Adam update in place.
    pub fn step(&mut self, net: &mut EmbeddingNet, grads: &NetGradients) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        let lr = self.learning_rate;
        net.version += 1;
        for l in 0..net.weights.len() {
            update_slice(
                &mut net.weights[l],
                &grads.weights[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                lr,
                c1,
                c2,
            );
            update_slice(
                &mut net.biases[l],
                &grads.biases[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                lr,
                c1,
                c2,
            );
        }
    }
}

fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    c1: f64,
    c2: f64,
) {
    for i in 0..params.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grads[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
}

/// Similarity of two class labels on a `1 - |a - b| / num_classes` ramp, so
/// equal classes score 1 and the most distant classes stay strictly positive.
pub fn class_similarity(a: usize, b: usize, num_classes: usize) -> Result<f64> {
    if a >= num_classes {
        return Err(Error::InvalidLabel {
            label: a,
            num_classes,
        });
    }
    if b >= num_classes {
        return Err(Error::InvalidLabel {
            label: b,
            num_classes,
        });
    }
    // (C - |a - b|) / C instead of 1 - |a - b| / C: algebraically the same,
    // but correctly rounded for every label pair.
    let diff = a.abs_diff(b) as f64;
    Ok((num_classes as f64 - diff) / num_classes as f64)
}

/// How pair similarities derive from class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityRule {
    /// Graded: [`class_similarity`].
    ClassDistance,
    /// Binary: 1 for equal labels, 0 otherwise.
    SameClass,
}

/// Which loss drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainLoss {
    /// The continuous histogram loss on the joint grid.
    Chl,
    /// The two-class histogram loss scaled by the batch prior product
    /// `p(S=0) * p(S=1)`; on binary similarities this matches [`Chl`]'s value
    /// and gradient, so both drive identical trajectories.
    ScaledHl,
}

/// Trainer hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Cap on pairs drawn from each batch (all pairs if the batch has fewer).
    pub pairs_per_batch: usize,
    pub distance_bins: usize,
    pub similarity_bins: usize,
    pub learning_rate: f64,
    pub loss: TrainLoss,
    pub similarity: SimilarityRule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 256,
            pairs_per_batch: 10_000,
            distance_bins: 100,
            similarity_bins: 100,
            learning_rate: 0.002,
            loss: TrainLoss::Chl,
            similarity: SimilarityRule::ClassDistance,
            seed: 0,
        }
    }
}

/// A trained network plus its mean per-batch loss for every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: EmbeddingNet,
    pub epoch_losses: Vec<f64>,
}

/// Trains an embedding network by minimizing the configured loss over
/// shuffled object batches. Deterministic in `cfg.seed`: weight init, epoch
/// shuffles, and pair subsampling each draw from their own seeded stream.
pub fn train_embedding(
    dataset: &LabeledDataset,
    layer_sizes: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if layer_sizes.first() != Some(&dataset.input_dim()) {
        return Err(Error::DimensionMismatch {
            expected: dataset.input_dim(),
            got: layer_sizes.first().copied().unwrap_or(0),
        });
    }
    if cfg.batch_size < 2 {
        return Err(Error::InvalidConfig(
            "batch size must be at least 2 to form pairs".into(),
        ));
    }
    if dataset.len() < 2 {
        return Err(Error::InvalidConfig(
            "dataset must hold at least 2 objects to form pairs".into(),
        ));
    }
    if cfg.pairs_per_batch == 0 {
        return Err(Error::InvalidConfig(
            "pairs_per_batch must be at least 1".into(),
        ));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(Error::InvalidConfig(
            "learning rate must be positive and finite".into(),
        ));
    }
    if cfg.loss == TrainLoss::ScaledHl && cfg.similarity != SimilarityRule::SameClass {
        return Err(Error::InvalidConfig(
            "the scaled histogram loss needs binary similarities; use the same-class rule".into(),
        ));
    }
    let bins = BinConfig::new(cfg.distance_bins, cfg.similarity_bins)?;

    let mut net = EmbeddingNet::new(layer_sizes, cfg.seed)?;
    let mut adam = AdamState::new(&net, cfg.learning_rate);
    let metric = BoundedEuclidean;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(1);
    let mut pair_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pair_rng.set_stream(2);

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue; // a trailing singleton has no pairs
            }
            let inputs: Vec<&[f64]> = chunk.iter().map(|&i| dataset.input(i)).collect();
            let pairs = sample_pairs(chunk.len(), cfg.pairs_per_batch, &mut pair_rng);
            let sims: Vec<f64> = pairs
                .iter()
                .map(|&(a, b)| {
                    pair_similarity(
                        cfg.similarity,
                        dataset.label(chunk[a]),
                        dataset.label(chunk[b]),
                        dataset.num_classes(),
                    )
                })
                .collect();

            let forward = forward_indexed(&net, &metric, &inputs, pairs)?;
            let (loss, dl_dd) = batch_loss(cfg.loss, &forward, sims, &bins)?;
            let grads = backward_pairs(&net, &metric, &forward, &dl_dd)?;
            adam.step(&mut net, &grads);
            loss_sum += loss;
            batches += 1;
        }
        epoch_losses.push(loss_sum / batches as f64);
    }
    Ok(TrainOutcome { net, epoch_losses })
}

fn pair_similarity(rule: SimilarityRule, a: usize, b: usize, num_classes: usize) -> f64 {
    match rule {
        SimilarityRule::ClassDistance => 1.0 - (a as f64 - b as f64).abs() / num_classes as f64,
        SimilarityRule::SameClass => {
            if a == b {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// All unordered index pairs of a batch, subsampled to `cap` with a partial
/// Fisher-Yates pass when there are more.
fn sample_pairs(objects: usize, cap: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut all = Vec::with_capacity(objects * (objects - 1) / 2);
    for i in 0..objects {
        for j in (i + 1)..objects {
            all.push((i, j));
        }
    }
    if all.len() <= cap {
        return all;
    }
    for k in 0..cap {
        let pick = rng.random_range(k..all.len());
        all.swap(k, pick);
    }
    all.truncate(cap);
    all
}

fn batch_loss(
    loss: TrainLoss,
    forward: &PairForward,
    sims: Vec<f64>,
    bins: &BinConfig,
) -> Result<(f64, Vec<f64>)> {
    match loss {
        TrainLoss::Chl => {
            let batch = PairBatch::new(forward.distances().to_vec(), sims)?;
            let grid = build_joint_histogram(&batch, bins);
            Ok((chl(&grid), chl_grad_given(&batch, &grid)))
        }
        TrainLoss::ScaledHl => {
            let total = sims.len();
            let pos = sims.iter().filter(|&&s| s == 1.0).count();
            let neg = total - pos;
            if pos == 0 || neg == 0 {
                // Degenerate batch: the joint loss is exactly zero too, so
                // both loss modes see the same (vanishing) signal.
                return Ok((0.0, vec![0.0; total]));
            }
            let batch = PairBatch::new(forward.distances().to_vec(), sims)?;
            let binary = build_binary_histograms(&batch, bins)?;
            let prior = (pos as f64 / total as f64) * (neg as f64 / total as f64);
            let value = prior * histogram_loss(&binary);
            let grads = hl_grad_distances(&batch, bins)?
                .into_iter()
                .map(|g| prior * g)
                .collect();
            Ok((value, grads))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_blobs;

    #[test]
    fn elu_is_continuous_and_monotone() {
        assert_eq!(elu(2.0), 2.0);
        assert!((elu(-1.0) - (f64::exp(-1.0) - 1.0)).abs() < 1e-15);
        assert!(elu(-1e-12).abs() < 1e-11);
        assert_eq!(elu_deriv(3.0), 1.0);
        assert!((elu_deriv(-2.0) - f64::exp(-2.0)).abs() < 1e-15);
    }

    #[test]
    fn bounded_metric_stays_in_unit_interval() {
        let m = BoundedEuclidean;
        assert_eq!(m.distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        let d = m.distance(&[0.0, 0.0], &[3.0, 4.0]);
        assert!((d - 5.0 / 6.0).abs() < 1e-15);
        let far = m.distance(&[0.0], &[1e9]);
        assert!(far < 1.0);
    }

    #[test]
    fn network_construction_and_shapes() {
        assert!(EmbeddingNet::new(&[4], 0).is_err());
        assert!(EmbeddingNet::new(&[4, 0, 2], 0).is_err());
        let net = EmbeddingNet::new(&[4, 3, 2], 0).unwrap();
        assert_eq!(net.input_dim(), 4);
        assert_eq!(net.output_dim(), 2);
        assert_eq!(net.num_layers(), 2);
        assert_eq!(net.param_count(), 4 * 3 + 3 + 3 * 2 + 2);
        // Biases start at zero, weights within the init bound.
        let b01 = (6.0 / 7.0f64).sqrt();
        for o in 0..3 {
            assert_eq!(net.bias(0, o), 0.0);
            for i in 0..4 {
                assert!(net.weight(0, o, i).abs() < b01);
            }
        }
        // Same seed, same weights; different seed, different weights.
        assert_eq!(net, EmbeddingNet::new(&[4, 3, 2], 0).unwrap());
        assert_ne!(net, EmbeddingNet::new(&[4, 3, 2], 1).unwrap());
    }

    #[test]
    fn param_accessors_round_trip() {
        let mut net = EmbeddingNet::new(&[3, 2, 2], 7).unwrap();
        let count = net.param_count();
        let before: Vec<f64> = (0..count).map(|i| net.param(i)).collect();
        let v0 = net.version();
        for (i, &b) in before.iter().enumerate() {
            net.set_param(i, b + 1.0);
        }
        assert_eq!(net.version(), v0 + count as u64);
        for (i, &b) in before.iter().enumerate() {
            assert_eq!(net.param(i), b + 1.0);
        }
    }

    #[test]
    fn embed_matches_manual_forward() {
        // Independent recomputation through the public weight accessors.
        let net = EmbeddingNet::new(&[3, 4, 2], 11).unwrap();
        let x = [0.3, -1.2, 0.75];
        let mut hidden = [0.0; 4];
        for (o, h) in hidden.iter_mut().enumerate() {
            let mut z = net.bias(0, o);
            for (i, &xi) in x.iter().enumerate() {
                z += net.weight(0, o, i) * xi;
            }
            *h = elu(z);
        }
        let mut expected = [0.0; 2];
        for (o, e) in expected.iter_mut().enumerate() {
            let mut z = net.bias(1, o);
            for (i, &hi) in hidden.iter().enumerate() {
                z += net.weight(1, o, i) * hi;
            }
            *e = z; // output layer is linear
        }
        let got = net.embed(&x).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-15);
        }
        assert!(net.embed(&[1.0, 2.0]).is_err());
    }

    /// One linear layer, one pair, hand-worked chain rule.
    #[test]
    fn backward_matches_hand_derivation() {
        let mut net = EmbeddingNet::new(&[2, 1], 0).unwrap();
        net.set_param(0, 0.5);
        net.set_param(1, -0.25);
        net.set_param(2, 0.1);
        let metric = BoundedEuclidean;
        let x: &[f64] = &[1.0, 2.0];
        let y: &[f64] = &[0.2, -0.4];
        let fwd = forward_pairs(&net, &metric, &[(x, y)]).unwrap();
        // Embeddings 0.1 and 0.3: e = 0.2, d = 1/6.
        assert!((fwd.distances()[0] - 1.0 / 6.0).abs() < 1e-15);
        let grads = backward_pairs(&net, &metric, &fwd, &[1.0]).unwrap();
        let flat = grads.flat();
        assert!((flat[0] - (-5.0 / 9.0)).abs() < 1e-12);
        assert!((flat[1] - (-5.0 / 3.0)).abs() < 1e-12);
        // Both branches shift by the bias equally, so its gradient cancels.
        assert!(flat[2].abs() < 1e-15);
    }

    #[test]
    fn backward_is_symmetric_under_branch_swap() {
        let net = EmbeddingNet::new(&[5, 4, 3], 2).unwrap();
        let metric = BoundedEuclidean;
        let a: Vec<f64> = (0..5).map(|i| (i as f64) * 0.3 - 0.7).collect();
        let b: Vec<f64> = (0..5).map(|i| 0.9 - (i as f64) * 0.21).collect();
        let fwd_ab = forward_pairs(&net, &metric, &[(&a, &b)]).unwrap();
        let fwd_ba = forward_pairs(&net, &metric, &[(&b, &a)]).unwrap();
        assert_eq!(fwd_ab.distances()[0], fwd_ba.distances()[0]);
        let g_ab = backward_pairs(&net, &metric, &fwd_ab, &[0.8]).unwrap();
        let g_ba = backward_pairs(&net, &metric, &fwd_ba, &[0.8]).unwrap();
        assert_eq!(g_ab, g_ba);
    }

    #[test]
    fn coincident_pair_contributes_nothing() {
        let net = EmbeddingNet::new(&[3, 2], 1).unwrap();
        let metric = BoundedEuclidean;
        let x: &[f64] = &[0.5, 0.5, 0.5];
        let fwd = forward_pairs(&net, &metric, &[(x, x)]).unwrap();
        assert_eq!(fwd.distances()[0], 0.0);
        let grads = backward_pairs(&net, &metric, &fwd, &[3.0]).unwrap();
        assert!(grads.flat().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut net = EmbeddingNet::new(&[2, 2], 0).unwrap();
        let metric = BoundedEuclidean;
        let x: &[f64] = &[0.1, 0.2];
        let y: &[f64] = &[0.9, -0.3];
        let fwd = forward_pairs(&net, &metric, &[(x, y)]).unwrap();
        net.set_param(0, 0.0);
        assert!(matches!(
            backward_pairs(&net, &metric, &fwd, &[1.0]),
            Err(Error::StaleCache)
        ));
    }

    #[test]
    fn backward_checks_gradient_count() {
        let net = EmbeddingNet::new(&[2, 2], 0).unwrap();
        let metric = BoundedEuclidean;
        let x: &[f64] = &[0.1, 0.2];
        let y: &[f64] = &[0.9, -0.3];
        let fwd = forward_pairs(&net, &metric, &[(x, y)]).unwrap();
        assert!(matches!(
            backward_pairs(&net, &metric, &fwd, &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn adam_moves_against_the_gradient() {
        let mut net = EmbeddingNet::new(&[2, 1], 4).unwrap();
        let w0 = net.param(0);
        let mut adam = AdamState::new(&net, 0.01);
        let mut grads = NetGradients::zeros_like(&net);
        grads.weights[0][0] = 2.5;
        let version = net.version();
        adam.step(&mut net, &grads);
        // First step moves by exactly lr regardless of gradient magnitude
        // (bias-corrected moments cancel), modulo epsilon.
        assert!((net.param(0) - (w0 - 0.01)).abs() < 1e-6);
        assert!(net.version() > version);
        // Untouched parameters stay put.
        assert_eq!(net.param(1), EmbeddingNet::new(&[2, 1], 4).unwrap().param(1));
    }

    #[test]
    fn class_similarity_ramp() {
        assert_eq!(class_similarity(0, 9, 10).unwrap(), 0.1);
        assert_eq!(class_similarity(2, 5, 10).unwrap(), 0.7);
        assert_eq!(class_similarity(3, 3, 5).unwrap(), 1.0);
        assert!(matches!(
            class_similarity(7, 2, 5),
            Err(Error::InvalidLabel { label: 7, num_classes: 5 })
        ));
    }

    #[test]
    fn sample_pairs_covers_or_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all = sample_pairs(5, 100, &mut rng);
        assert_eq!(all.len(), 10);
        let capped = sample_pairs(40, 25, &mut rng);
        assert_eq!(capped.len(), 25);
        for &(i, j) in &capped {
            assert!(i < j && j < 40);
        }
        // No duplicates in the subsample.
        let mut seen = capped.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 25);
    }

    #[test]
    fn train_rejects_bad_configs() {
        let data = make_blobs(3, 5, 4, 0.1, 0).unwrap();
        let cfg = TrainConfig::default();
        assert!(matches!(
            train_embedding(&data, &[5, 2], &cfg),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
        let bad = TrainConfig {
            batch_size: 1,
            ..cfg.clone()
        };
        assert!(train_embedding(&data, &[4, 2], &bad).is_err());
        let bad = TrainConfig {
            loss: TrainLoss::ScaledHl,
            similarity: SimilarityRule::ClassDistance,
            ..cfg.clone()
        };
        assert!(train_embedding(&data, &[4, 2], &bad).is_err());
        let bad = TrainConfig {
            pairs_per_batch: 0,
            ..cfg.clone()
        };
        assert!(train_embedding(&data, &[4, 2], &bad).is_err());
        let bad = TrainConfig {
            learning_rate: -1.0,
            ..cfg
        };
        assert!(train_embedding(&data, &[4, 2], &bad).is_err());
    }

    #[test]
    fn zero_epochs_returns_the_initialized_net() {
        let data = make_blobs(3, 5, 4, 0.1, 0).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            seed: 9,
            ..TrainConfig::default()
        };
        let out = train_embedding(&data, &[4, 3, 2], &cfg).unwrap();
        assert!(out.epoch_losses.is_empty());
        assert_eq!(out.net, EmbeddingNet::new(&[4, 3, 2], 9).unwrap());
    }

    #[test]
    fn training_is_deterministic() {
        let data = make_blobs(4, 8, 5, 0.15, 3).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 16,
            pairs_per_batch: 60,
            distance_bins: 16,
            similarity_bins: 8,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train_embedding(&data, &[5, 6, 2], &cfg).unwrap();
        let b = train_embedding(&data, &[5, 6, 2], &cfg).unwrap();
        assert_eq!(a.epoch_losses, b.epoch_losses);
        assert_eq!(a.net, b.net);
        let c = train_embedding(
            &data,
            &[5, 6, 2],
            &TrainConfig {
                seed: 6,
                ..cfg
            },
        )
        .unwrap();
        assert_ne!(a.epoch_losses, c.epoch_losses);
    }

    #[test]
    fn training_reduces_the_loss() {
        let data = make_blobs(4, 12, 4, 0.1, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 8,
            batch_size: 48,
            pairs_per_batch: 1128,
            distance_bins: 32,
            similarity_bins: 16,
            learning_rate: 0.01,
            seed: 1,
            ..TrainConfig::default()
        };
        let out = train_embedding(&data, &[4, 8, 2], &cfg).unwrap();
        assert_eq!(out.epoch_losses.len(), 8);
        let first = out.epoch_losses[0];
        let last = *out.epoch_losses.last().unwrap();
        assert!(last < first, "loss went from {first} to {last}");
    }

    #[test]
    fn scaled_hl_matches_chl_on_binary_batches() {
        let data = make_blobs(2, 12, 3, 0.2, 8).unwrap();
        let base = TrainConfig {
            epochs: 3,
            batch_size: 8,
            pairs_per_batch: 28,
            distance_bins: 16,
            similarity_bins: 2,
            learning_rate: 0.01,
            similarity: SimilarityRule::SameClass,
            seed: 8,
            ..TrainConfig::default()
        };
        let joint = train_embedding(&data, &[3, 4, 2], &base).unwrap();
        let scaled = train_embedding(
            &data,
            &[3, 4, 2],
            &TrainConfig {
                loss: TrainLoss::ScaledHl,
                ..base
            },
        )
        .unwrap();
        assert_eq!(joint.epoch_losses.len(), scaled.epoch_losses.len());
        for (a, b) in joint.epoch_losses.iter().zip(&scaled.epoch_losses) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}
