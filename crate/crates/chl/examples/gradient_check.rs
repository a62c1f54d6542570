//! Checks the analytic gradients against central finite differences: first
//! the loss as a function of raw pair distances, then the full pipeline from
//! network parameters through embeddings, the bounded metric, and the
//! histogram to the loss.

use chl::gradcheck::{
    check_distance_gradients, check_network_gradients, CheckReport, DistanceCheckConfig,
    NetworkCheckConfig,
};

fn show(name: &str, report: &CheckReport) {
    println!(
        "{name}: {} comparisons, max rel err {:.3e}, max abs err {:.3e} -> {}",
        report.comparisons,
        report.max_rel_err,
        report.max_abs_err,
        if report.pass { "PASS" } else { "FAIL" }
    );
}

fn main() {
    let distance = check_distance_gradients(&DistanceCheckConfig {
        batches: 25,
        ..DistanceCheckConfig::default()
    })
    .unwrap();
    show("distance gradients", &distance);

    let network = check_network_gradients(&NetworkCheckConfig::default()).unwrap();
    show("network gradients ", &network);
}
