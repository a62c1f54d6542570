//! The loss family side by side: the binary histogram loss, its continuous
//! generalization over graded similarities, the two alternative corner sums,
//! and the exact reduction of the continuous form on binary labels.

use chl::histogram::{build_binary_histograms, build_joint_histogram, BinConfig, PairBatch};
use chl::loss::{chl, chl_variant_l1, chl_variant_l2, histogram_loss, hl_reduction_check};

fn main() {
    // Binary labels: 1 = similar, 0 = dissimilar.
    let distances = vec![0.1, 0.2, 0.85, 0.7, 0.4, 0.96];
    let similarities = vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let batch = PairBatch::new(distances, similarities).unwrap();
    let config = BinConfig::new(16, 2).unwrap();

    let binary = build_binary_histograms(&batch, &config).unwrap();
    println!(
        "histogram loss (chance a dissimilar pair is closer than a similar one): {:.4}",
        histogram_loss(&binary)
    );

    let grid = build_joint_histogram(&batch, &config);
    println!("continuous loss on the joint grid: {:.4}", chl(&grid));
    println!(
        "corner variants: L1 = {:.4}, L2 = {:.4}",
        chl_variant_l1(&grid),
        chl_variant_l2(&grid)
    );

    // On binary similarities the continuous loss is the binary one scaled by
    // the class priors, exactly.
    let reduction = hl_reduction_check(&batch, &config).unwrap();
    println!(
        "reduction: {:.6} = {:.4} * {:.6} (residual {:.1e})",
        reduction.chl_value, reduction.prior_product, reduction.hl_value, reduction.residual
    );

    // With graded similarities the loss measures ordering violations between
    // every pair of similarity levels, weighted by the inverted mass.
    let levels = vec![0.0, 0.3, 0.7, 1.0];
    let cfg = BinConfig::new(11, 5).unwrap();
    let anti = PairBatch::new(vec![0.9, 0.6, 0.3, 0.1], levels.clone()).unwrap();
    let co = PairBatch::new(vec![0.1, 0.3, 0.6, 0.9], levels).unwrap();
    println!(
        "\nanti-monotone distances (less similar = farther): loss {}",
        chl(&build_joint_histogram(&anti, &cfg))
    );
    println!(
        "co-monotone distances (less similar = closer):     loss {:.4}",
        chl(&build_joint_histogram(&co, &cfg))
    );
}
