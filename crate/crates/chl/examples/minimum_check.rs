//! The zero-loss criterion: a joint histogram is at the loss's minimum
//! exactly when every occupied similarity column sits strictly closer in
//! distance than all less-similar columns. The checker verifies this and
//! names the offending cells otherwise.

use chl::histogram::{BinConfig, HistogramGrid};
use chl::loss::chl;
use chl::optim::check_minimum;

fn main() {
    let config = BinConfig::new(4, 4).unwrap();

    // Anti-diagonal: the most similar pairs at the smallest distances.
    let mut values = vec![0.0; 16];
    for z in 0..4 {
        values[(3 - z) * 4 + z] = 0.25;
    }
    let grid = HistogramGrid::from_values(config, values.clone()).unwrap();
    let check = check_minimum(&grid, 0.0);
    println!(
        "anti-diagonal grid: loss {}, minimum: {}",
        chl(&grid),
        check.is_minimum
    );

    // A morsel of mass at (distance 0, similarity 0) breaks the ordering:
    // the least similar pairs are no longer strictly the farthest.
    values[0] += 0.05;
    let grid = HistogramGrid::from_values(config, values).unwrap();
    let check = check_minimum(&grid, 0.0);
    println!(
        "perturbed grid:     loss {:.4}, minimum: {}, witnesses {:?}",
        chl(&grid),
        check.is_minimum,
        check.violations
    );
}
