//! The continuous histogram loss, its variants, and their exact gradients.
//!
//! For a joint grid `h` the primary loss is `L = sum h[r][z] * phi[r][z]` with
//! `phi` the upper-right corner table: the probability, under the histogram
//! estimate, that a strictly more similar pair lands at an equal-or-larger
//! distance bin. The mirrored form `L1 = sum h[r][z] * psi[r][z]` counts the
//! same reversed orderings from the other side, and `L2 = L + L1`. All three
//! are quadratic in the grid, so their histogram-space gradients are plain
//! table sums, and because each distance enters the grid through a piecewise
//! linear kernel the distance-space gradient of `L` is exact as well.
//!
//! For binary similarities the two-class histogram loss
//! `HL = sum_r h_neg[r] * sum_{q >= r} h_pos[q]` is also provided, together
//! with a check of the identity `L = p(S=0) * p(S=1) * HL` that connects the
//! two formulations.

use crate::histogram::{
    build_binary_histograms, build_joint_histogram, cumulative_tables, similarity_bin_unchecked,
    soft_assign_unchecked, BinConfig, BinaryHistograms, HistogramGrid, PairBatch,
};
use crate::Result;

/// Two-class histogram loss: mass of dissimilar pairs times the similar mass
/// at equal or greater distance, summed over bins.
pub fn histogram_loss(h: &BinaryHistograms) -> f64 {
    let mut pos_suffix = 0.0;
    let mut total = 0.0;
    for r in (0..h.h_pos().len()).rev() {
        pos_suffix += h.h_pos()[r];
        total += h.h_neg()[r] * pos_suffix;
    }
    total
}

/// Continuous histogram loss of a grid: `sum h * phi`.
pub fn chl(grid: &HistogramGrid) -> f64 {
    let t = cumulative_tables(grid);
    dot(grid.values(), t.phi_values())
}

/// Mirrored variant: `sum h * psi`.
pub fn chl_variant_l1(grid: &HistogramGrid) -> f64 {
    let t = cumulative_tables(grid);
    dot(grid.values(), t.psi_values())
}

/// Symmetric variant, definitionally `chl + chl_variant_l1`.
pub fn chl_variant_l2(grid: &HistogramGrid) -> f64 {
    chl(grid) + chl_variant_l1(grid)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient of `chl` with respect to every grid entry, row-major.
///
/// Differentiating the quadratic form gives the direct term `phi[r][z]` plus
/// `psi[r][z]` from the entries whose own corner sums include `(r, z)`.
pub fn grad_wrt_histogram(grid: &HistogramGrid) -> Vec<f64> {
    let t = cumulative_tables(grid);
    t.phi_values()
        .iter()
        .zip(t.psi_values())
        .map(|(p, q)| p + q)
        .collect()
}

/// Gradient of `chl_variant_l1`: the direct term is now `psi`, the product
/// rule contributes `phi`, so the variants share one gradient.
pub fn grad_wrt_histogram_l1(grid: &HistogramGrid) -> Vec<f64> {
    let t = cumulative_tables(grid);
    t.psi_values()
        .iter()
        .zip(t.phi_values())
        .map(|(q, p)| q + p)
        .collect()
}

/// Gradient of `chl_variant_l2`, the sum of the other two gradients.
pub fn grad_wrt_histogram_l2(grid: &HistogramGrid) -> Vec<f64> {
    grad_wrt_histogram(grid)
        .iter()
        .zip(grad_wrt_histogram_l1(grid))
        .map(|(a, b)| a + b)
        .collect()
}

/// Exact gradient of `chl` with respect to each distance in the batch.
///
/// Within its segment, pair `i` moves mass between bins `r_i` and `r_i + 1` of
/// column `z_i` at rate `1/(delta_d * M)`, so the loss is locally linear in
/// `d_i` and the gradient is the difference of the histogram-space gradient at
/// those two cells. That difference telescopes to single-row sums: mass of row
/// `r_i + 1` at strictly lower similarity minus mass of row `r_i` at strictly
/// higher similarity. Pairs with nothing in either region get an exact zero.
pub fn chl_grad_distances(batch: &PairBatch, config: &BinConfig) -> Vec<f64> {
    let grid = build_joint_histogram(batch, config);
    chl_grad_given(batch, &grid)
}

/// Same as [`chl_grad_distances`], reusing an already built grid.
/// `grid` must be the joint histogram of `batch` under its own config.
pub(crate) fn chl_grad_given(batch: &PairBatch, grid: &HistogramGrid) -> Vec<f64> {
    let config = *grid.config();
    let n = config.distance_bins();
    let m = config.similarity_bins();
    let h = grid.values();

    // row_prefix[r][z] = mass of row r strictly left of z; row_suffix strictly right.
    let mut row_prefix = vec![0.0; n * m];
    let mut row_suffix = vec![0.0; n * m];
    for r in 0..n {
        let mut acc = 0.0;
        for z in 0..m {
            row_prefix[r * m + z] = acc;
            acc += h[r * m + z];
        }
        acc = 0.0;
        for z in (0..m).rev() {
            row_suffix[r * m + z] = acc;
            acc += h[r * m + z];
        }
    }

    let scale = 1.0 / (config.delta_d() * batch.len() as f64);
    batch
        .distances()
        .iter()
        .zip(batch.similarities())
        .map(|(&d, &s)| {
            let a = soft_assign_unchecked(d, n);
            let z = similarity_bin_unchecked(s, m);
            scale * (row_prefix[(a.segment + 1) * m + z] - row_suffix[a.segment * m + z])
        })
        .collect()
}

/// Exact gradient of the two-class [`histogram_loss`] with respect to each
/// distance of a binary-similarity batch.
///
/// A similar pair in segment `k` feels the dissimilar mass waiting at bin
/// `k + 1`; a dissimilar pair is pushed outward by the similar mass at bin `k`.
pub fn hl_grad_distances(batch: &PairBatch, config: &BinConfig) -> Result<Vec<f64>> {
    let h = build_binary_histograms(batch, config)?;
    let n = config.distance_bins();
    let scale_pos = 1.0 / (config.delta_d() * h.count_pos() as f64);
    let scale_neg = 1.0 / (config.delta_d() * h.count_neg() as f64);
    Ok(batch
        .distances()
        .iter()
        .zip(batch.similarities())
        .map(|(&d, &s)| {
            let k = soft_assign_unchecked(d, n).segment;
            if s == 1.0 {
                scale_pos * h.h_neg()[k + 1]
            } else {
                -scale_neg * h.h_pos()[k]
            }
        })
        .collect())
}

/// Result of [`hl_reduction_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlReduction {
    pub chl_value: f64,
    pub hl_value: f64,
    /// `p(S=0) * p(S=1)` estimated from the batch.
    pub prior_product: f64,
    /// `|chl - prior_product * hl|`.
    pub residual: f64,
}

/// Evaluates both formulations on a binary-similarity batch and reports how
/// well the identity `chl = p(S=0) * p(S=1) * hl` holds.
pub fn hl_reduction_check(batch: &PairBatch, config: &BinConfig) -> Result<HlReduction> {
    let binary = build_binary_histograms(batch, config)?;
    let hl_value = histogram_loss(&binary);
    let chl_value = chl(&build_joint_histogram(batch, config));
    let m = batch.len() as f64;
    let prior_product =
        (binary.count_pos() as f64 / m) * (binary.count_neg() as f64 / m);
    Ok(HlReduction {
        chl_value,
        hl_value,
        prior_product,
        residual: (chl_value - prior_product * hl_value).abs(),
    })
}
