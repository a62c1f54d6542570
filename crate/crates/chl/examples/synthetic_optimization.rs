//! Gradient descent directly on pair distances: sample (distance, similarity)
//! pairs, descend the loss, and watch the distance distribution organize
//! itself against the similarity distribution.
//!
//! The run also illustrates the descent timescale. Per-pair gradients are
//! averages of histogram mass fractions, so velocities scale like 1/M and a
//! small batch converges far faster than a large one at the same step size.

use chl::histogram::{BinConfig, PairBatch};
use chl::optim::{
    initial_distances, optimize_distances, sample_similarities, OptimizationRun,
    SimilarityDistribution,
};
use chl::stats::spearman;

const BINS: usize = 51;
const LEARNING_RATE: f64 = 0.1;
const ITERATIONS: usize = 3000;
const SEED: u64 = 0;

fn run_scenario(name: &str, pairs: usize) {
    let dist = SimilarityDistribution::from_name(name).expect("known scenario");
    let similarities = sample_similarities(&dist, pairs, SEED);
    let distances = initial_distances(pairs, SEED);
    let batch = PairBatch::new(distances, similarities.clone()).expect("valid batch");
    let config = BinConfig::new(BINS, BINS).expect("valid bins");
    let run = OptimizationRun::new(batch, config, LEARNING_RATE, ITERATIONS, vec![], SEED)
        .expect("valid run");

    let trajectory = optimize_distances(&run);
    let initial = trajectory.loss_curve[0];
    let last = *trajectory.loss_curve.last().unwrap();
    let rho = spearman(&trajectory.final_distances, &similarities);
    println!(
        "  {name:<18} M={pairs:<6} loss {initial:.4} -> {last:.2e} ({:5.1}% of initial)  spearman(d,s) {rho:+.3}",
        100.0 * last / initial
    );
}

fn main() {
    for &pairs in &[100_usize, 1000] {
        println!("batch size {pairs}:");
        for name in [
            "uniform",
            "concentrated",
            "mostly_dissimilar",
            "mostly_similar",
        ] {
            run_scenario(name, pairs);
        }
        println!();
    }
}
