//! The triangular-kernel soft assignment that makes the histogram
//! differentiable: each distance splits unit weight linearly between the two
//! nearest bin nodes, so moving a distance moves mass continuously.

use chl::histogram::{similarity_bin, soft_assign, BinConfig};

fn main() {
    let config = BinConfig::new(11, 5).unwrap();
    println!(
        "{} distance nodes, spacing {:.1}",
        config.distance_bins(),
        config.delta_d()
    );

    for d in [0.0, 0.13, 0.55, 0.995, 1.0] {
        let a = soft_assign(d, &config).unwrap();
        println!(
            "  d = {d:<5} -> bins ({}, {}) with weights ({:.2}, {:.2})",
            a.segment,
            a.segment + 1,
            a.lower,
            a.upper
        );
    }

    // The two weights always sum to one, so total histogram mass never
    // depends on where the distances happen to sit.
    let total: f64 = soft_assign(0.377, &config)
        .unwrap()
        .dense(&config)
        .iter()
        .sum();
    println!("partition of unity: {total}");

    // A distance exactly on an interior node uses the left segment; all of
    // its weight still lands on the node's own bin.
    let node = config.distance_node(4);
    let a = soft_assign(node, &config).unwrap();
    println!(
        "d = {node:.1} (a node): segment {}, weights ({}, {})",
        a.segment, a.lower, a.upper
    );

    // Similarities bin hard to the nearest node; exact midpoints go left.
    println!("\nsimilarity bins ({} nodes):", config.similarity_bins());
    for s in [0.0, 0.1, 0.125, 0.13, 1.0] {
        println!("  s = {s:<5} -> bin {}", similarity_bin(s, &config).unwrap());
    }
}
