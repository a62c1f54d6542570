//! Builds the joint (distance, similarity) histogram of a batch and prints it
//! together with the corner-sum tables that drive the loss.

use chl::histogram::{build_joint_histogram, cumulative_tables, BinConfig, PairBatch};

fn main() {
    let distances = vec![0.05, 0.3, 0.62, 0.9, 0.75, 0.5];
    let similarities = vec![0.9, 1.0, 0.4, 0.0, 0.15, 0.55];
    let batch = PairBatch::new(distances, similarities).unwrap();
    let config = BinConfig::new(6, 4).unwrap();
    let grid = build_joint_histogram(&batch, &config);

    println!("joint histogram, rows are distance bins (top = smallest):");
    for r in 0..config.distance_bins() {
        let row: Vec<String> = (0..config.similarity_bins())
            .map(|z| format!("{:.3}", grid.get(r, z)))
            .collect();
        println!("  {}", row.join("  "));
    }
    println!("total mass: {}", grid.total_mass());

    let tables = cumulative_tables(&grid);
    // phi(r, z): mass at distance >= bin r with strictly higher similarity.
    // A similar-but-far pair sees every closer dissimilar pair through it.
    println!("\nphi (mass at larger distance, strictly higher similarity):");
    for r in 0..config.distance_bins() {
        let row: Vec<String> = (0..config.similarity_bins())
            .map(|z| format!("{:.3}", tables.phi(r, z)))
            .collect();
        println!("  {}", row.join("  "));
    }
    println!(
        "\npsi(n-1, m-1) sums everything closer and less similar: {:.3}",
        tables.psi(config.distance_bins() - 1, config.similarity_bins() - 1)
    );
}
