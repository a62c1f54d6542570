//! Trains a small embedding net on Gaussian class blobs with graded
//! class-distance similarities, then checks that the classes land in index
//! order along the principal direction of the 2-D embedding.

use chl::data::make_blobs;
use chl::embed::{train_embedding, TrainConfig};
use chl::stats::{principal_direction_2d, spearman};

fn main() {
    let classes = 6;
    let dataset = make_blobs(classes, 30, 8, 0.1, 3).unwrap();
    let config = TrainConfig {
        epochs: 15,
        batch_size: 90,
        pairs_per_batch: 2000,
        distance_bins: 32,
        similarity_bins: 32,
        seed: 3,
        ..TrainConfig::default()
    };
    let outcome = train_embedding(&dataset, &[8, 12, 2], &config).unwrap();
    for (k, loss) in outcome.epoch_losses.iter().enumerate() {
        println!("epoch {:>2}: mean loss {loss:.5}", k + 1);
    }

    // Class centroids in embedding space.
    let mut sums = vec![(0.0, 0.0); classes];
    let mut counts = vec![0usize; classes];
    for i in 0..dataset.len() {
        let e = outcome.net.embed(dataset.input(i)).unwrap();
        let c = dataset.label(i);
        sums[c].0 += e[0];
        sums[c].1 += e[1];
        counts[c] += 1;
    }
    let centroids: Vec<(f64, f64)> = sums
        .iter()
        .zip(&counts)
        .map(|(&(x, y), &k)| (x / k as f64, y / k as f64))
        .collect();

    // Projected on the first principal direction, centroid order should
    // follow class index (up to a global sign).
    let axis = principal_direction_2d(&centroids);
    let projections: Vec<f64> = centroids
        .iter()
        .map(|&(x, y)| x * axis.0 + y * axis.1)
        .collect();
    let indices: Vec<f64> = (0..classes).map(|c| c as f64).collect();
    println!("\ncentroid projections along the principal axis:");
    for (c, p) in projections.iter().enumerate() {
        println!("  class {c}: {p:+.4}");
    }
    println!(
        "spearman(class index, projection) = {:+.3}",
        spearman(&indices, &projections)
    );
}
