//! Soft distance binning, similarity binning, and the histogram grids the
//! losses are computed from.
//!
//! A [`BinConfig`] places `n` distance nodes and `m` similarity nodes evenly on
//! `[0, 1]`, so adjacent nodes are `1/(n-1)` (resp. `1/(m-1)`) apart. A distance
//! is assigned to the two nodes bracketing it with triangular-kernel weights
//! that sum to one; a similarity is rounded to its nearest node. Exact ties
//! resolve leftward in both cases: a distance sitting on an interior node is
//! treated as the right endpoint of the segment to its left, and a similarity
//! exactly midway between two nodes joins the lower bin. These conventions make
//! histogram construction deterministic and keep the distance kernel's partition
//! of unity exact.

use crate::{Error, Result};

/// Bin layout for the joint grid: `n` distance bins by `m` similarity bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinConfig {
    n: usize,
    m: usize,
}

impl BinConfig {
    /// Creates a layout with `n` distance bins and `m` similarity bins.
    /// Both counts must be at least 2.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::InvalidBins { n, m });
        }
        Ok(Self { n, m })
    }

    /// Square layout with `k` bins on both axes.
    pub fn square(k: usize) -> Result<Self> {
        Self::new(k, k)
    }

    pub fn distance_bins(&self) -> usize {
        self.n
    }

    pub fn similarity_bins(&self) -> usize {
        self.m
    }

    /// Distance bin width `1/(n-1)`.
    pub fn delta_d(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Similarity bin width `1/(m-1)`.
    pub fn delta_s(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    /// Location of distance node `r`, zero-based.
    pub fn distance_node(&self, r: usize) -> f64 {
        r as f64 / (self.n - 1) as f64
    }

    /// Location of similarity node `z`, zero-based.
    pub fn similarity_node(&self, z: usize) -> f64 {
        z as f64 / (self.m - 1) as f64
    }
}

/// A validated batch of (distance, similarity) pairs, both in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    distances: Vec<f64>,
    similarities: Vec<f64>,
}

impl PairBatch {
    /// Builds a batch, rejecting empty input, mismatched lengths, and any
    /// value outside `[0, 1]` (NaN included).
    pub fn new(distances: Vec<f64>, similarities: Vec<f64>) -> Result<Self> {
        if distances.len() != similarities.len() {
            return Err(Error::LengthMismatch {
                left: distances.len(),
                right: similarities.len(),
            });
        }
        if distances.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for &d in &distances {
            check_unit("distance", d)?;
        }
        for &s in &similarities {
            check_unit("similarity", s)?;
        }
        Ok(Self {
            distances,
            similarities,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty batches
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn similarities(&self) -> &[f64] {
        &self.similarities
    }

    /// Mutable distance access for the optimizer. Callers must keep every
    /// entry inside `[0, 1]`.
    pub(crate) fn distances_mut(&mut self) -> &mut [f64] {
        &mut self.distances
    }
}

fn check_unit(what: &'static str, value: f64) -> Result<()> {
    // The negated comparison also catches NaN.
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange { what, value });
    }
    Ok(())
}

/// Triangular-kernel weights of one distance: `lower` goes to bin `segment`,
/// `upper` to bin `segment + 1`, and they sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftAssign {
    pub segment: usize,
    pub lower: f64,
    pub upper: f64,
}

impl SoftAssign {
    /// Weight received by bin `r`; zero outside the bracketing pair.
    pub fn weight(&self, r: usize) -> f64 {
        if r == self.segment {
            self.lower
        } else if r == self.segment + 1 {
            self.upper
        } else {
            0.0
        }
    }

    /// Dense weight vector over all `n` bins. Mostly for inspection and tests.
    pub fn dense(&self, config: &BinConfig) -> Vec<f64> {
        let mut w = vec![0.0; config.distance_bins()];
        w[self.segment] = self.lower;
        w[self.segment + 1] = self.upper;
        w
    }
}

pub(crate) fn soft_assign_unchecked(d: f64, n: usize) -> SoftAssign {
    let segments = (n - 1) as f64;
    let scaled = d * segments;
    let mut segment = scaled as usize;
    if segment >= n - 1 {
        segment = n - 2; // d == 1.0 lands on the last segment
    }
    let mut offset = scaled - segment as f64;
    if offset == 0.0 && segment > 0 {
        // Interior node: treat as the right endpoint of the left segment.
        segment -= 1;
        offset = 1.0;
    }
    SoftAssign {
        segment,
        lower: 1.0 - offset,
        upper: offset,
    }
}

/// Soft-assigns a distance to its two bracketing bins.
///
/// The weights are `1 - t` and `t` where `t` is the position of `d` inside its
/// segment, so they always sum to one exactly.
pub fn soft_assign(d: f64, config: &BinConfig) -> Result<SoftAssign> {
    check_unit("distance", d)?;
    Ok(soft_assign_unchecked(d, config.distance_bins()))
}

pub(crate) fn similarity_bin_unchecked(s: f64, m: usize) -> usize {
    let pos = s * (m - 1) as f64;
    let mut z = (pos + 0.5).floor() as usize;
    // Exact midpoints between nodes belong to the lower bin.
    if z as f64 - pos == 0.5 {
        z -= 1;
    }
    z.min(m - 1)
}

/// Hard-assigns a similarity to its nearest bin node (ties go left).
pub fn similarity_bin(s: f64, config: &BinConfig) -> Result<usize> {
    check_unit("similarity", s)?;
    Ok(similarity_bin_unchecked(s, config.similarity_bins()))
}

/// A nonnegative `n x m` grid over (distance bin, similarity bin), stored
/// row-major by distance bin.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    config: BinConfig,
    values: Vec<f64>,
}

impl HistogramGrid {
    /// Wraps raw values as a grid. Entries must be finite and nonnegative;
    /// total mass is not constrained, so perturbed and unnormalized grids can
    /// be analyzed too.
    pub fn from_values(config: BinConfig, values: Vec<f64>) -> Result<Self> {
        let expected = config.distance_bins() * config.similarity_bins();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: expected,
            });
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::OutOfRange {
                    what: "histogram entry",
                    value: v,
                });
            }
        }
        Ok(Self { config, values })
    }

    pub fn config(&self) -> &BinConfig {
        &self.config
    }

    /// Entry at distance bin `r`, similarity bin `z`.
    pub fn get(&self, r: usize, z: usize) -> f64 {
        self.values[r * self.config.similarity_bins() + z]
    }

    /// Row-major backing slice (distance bins are rows).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Builds the joint histogram of a batch. Each pair contributes `1/M` split
/// across its two distance bins in its similarity column, so the grid always
/// has unit total mass up to rounding.
pub fn build_joint_histogram(batch: &PairBatch, config: &BinConfig) -> HistogramGrid {
    let m_bins = config.similarity_bins();
    let mut values = vec![0.0; config.distance_bins() * m_bins];
    let w = 1.0 / batch.len() as f64;
    for (&d, &s) in batch.distances().iter().zip(batch.similarities()) {
        let z = similarity_bin_unchecked(s, m_bins);
        let a = soft_assign_unchecked(d, config.distance_bins());
        values[a.segment * m_bins + z] += a.lower * w;
        values[(a.segment + 1) * m_bins + z] += a.upper * w;
    }
    HistogramGrid {
        config: *config,
        values,
    }
}

/// One-dimensional distance histograms of the similar and dissimilar pairs of
/// a binary-similarity batch, each normalized by its own class count.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryHistograms {
    h_pos: Vec<f64>,
    h_neg: Vec<f64>,
    count_pos: usize,
    count_neg: usize,
}

impl BinaryHistograms {
    /// Histogram of the similar (`s = 1`) pairs.
    pub fn h_pos(&self) -> &[f64] {
        &self.h_pos
    }

    /// Histogram of the dissimilar (`s = 0`) pairs.
    pub fn h_neg(&self) -> &[f64] {
        &self.h_neg
    }

    pub fn count_pos(&self) -> usize {
        self.count_pos
    }

    pub fn count_neg(&self) -> usize {
        self.count_neg
    }
}

/// Splits a binary-similarity batch into per-class distance histograms.
///
/// Every similarity must be exactly `0.0` or `1.0` and both classes must be
/// present, otherwise the per-class normalization is undefined.
pub fn build_binary_histograms(batch: &PairBatch, config: &BinConfig) -> Result<BinaryHistograms> {
    let n = config.distance_bins();
    let mut h_pos = vec![0.0; n];
    let mut h_neg = vec![0.0; n];
    let mut count_pos = 0usize;
    let mut count_neg = 0usize;
    for &s in batch.similarities() {
        if s == 1.0 {
            count_pos += 1;
        } else if s == 0.0 {
            count_neg += 1;
        } else {
            return Err(Error::NonBinarySimilarity { value: s });
        }
    }
    if count_pos == 0 {
        return Err(Error::MissingClass("similar"));
    }
    if count_neg == 0 {
        return Err(Error::MissingClass("dissimilar"));
    }
    let w_pos = 1.0 / count_pos as f64;
    let w_neg = 1.0 / count_neg as f64;
    for (&d, &s) in batch.distances().iter().zip(batch.similarities()) {
        let a = soft_assign_unchecked(d, n);
        let (h, w) = if s == 1.0 {
            (&mut h_pos, w_pos)
        } else {
            (&mut h_neg, w_neg)
        };
        h[a.segment] += a.lower * w;
        h[a.segment + 1] += a.upper * w;
    }
    Ok(BinaryHistograms {
        h_pos,
        h_neg,
        count_pos,
        count_neg,
    })
}

/// Corner-sum tables of a grid.
///
/// `phi[r][z]` is the mass at strictly higher similarity and equal-or-higher
/// distance bin (`r' >= r`, `z' > z`); `psi[r][z]` the mass at strictly lower
/// similarity and equal-or-lower distance bin (`r' <= r`, `z' < z`). Both are
/// filled in one `O(n * m)` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTables {
    n: usize,
    m: usize,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

impl CumulativeTables {
    pub fn phi(&self, r: usize, z: usize) -> f64 {
        self.phi[r * self.m + z]
    }

    pub fn psi(&self, r: usize, z: usize) -> f64 {
        self.psi[r * self.m + z]
    }

    /// Row-major `phi` table.
    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    /// Row-major `psi` table.
    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }
}

/// Computes the corner-sum tables of `grid`.
pub fn cumulative_tables(grid: &HistogramGrid) -> CumulativeTables {
    let n = grid.config().distance_bins();
    let m = grid.config().similarity_bins();
    let h = grid.values();

    // Suffix over distance bins: col[r][z] = sum of h[r'][z] for r' >= r.
    let mut col_suffix = vec![0.0; n * m];
    for z in 0..m {
        let mut acc = 0.0;
        for r in (0..n).rev() {
            acc += h[r * m + z];
            col_suffix[r * m + z] = acc;
        }
    }
    // Exclusive suffix over similarity bins turns that into the phi corner.
    let mut phi = vec![0.0; n * m];
    for r in 0..n {
        let mut acc = 0.0;
        for z in (0..m).rev() {
            phi[r * m + z] = acc;
            acc += col_suffix[r * m + z];
        }
    }

    // Prefix over distance bins: col[r][z] = sum of h[r'][z] for r' <= r.
    let mut col_prefix = vec![0.0; n * m];
    for z in 0..m {
        let mut acc = 0.0;
        for r in 0..n {
            acc += h[r * m + z];
            col_prefix[r * m + z] = acc;
        }
    }
    // Exclusive prefix over similarity bins gives the psi corner.
    let mut psi = vec![0.0; n * m];
    for r in 0..n {
        let mut acc = 0.0;
        for z in 0..m {
            psi[r * m + z] = acc;
            acc += col_prefix[r * m + z];
        }
    }

    CumulativeTables { n, m, phi, psi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bins(n: usize, m: usize) -> BinConfig {
        BinConfig::new(n, m).unwrap()
    }

    #[test]
    fn bin_config_rejects_degenerate_layouts() {
        assert!(matches!(
            BinConfig::new(1, 4),
            Err(Error::InvalidBins { n: 1, m: 4 })
        ));
        assert!(BinConfig::new(2, 2).is_ok());
        let c = bins(51, 11);
        assert_eq!(c.delta_d(), 1.0 / 50.0);
        assert_eq!(c.delta_s(), 0.1);
        assert_eq!(c.distance_node(0), 0.0);
        assert_eq!(c.distance_node(50), 1.0);
        assert_eq!(c.similarity_node(5), 0.5);
    }

    #[test]
    fn batch_validation() {
        assert!(matches!(
            PairBatch::new(vec![], vec![]),
            Err(Error::EmptyBatch)
        ));
        assert!(matches!(
            PairBatch::new(vec![0.5], vec![0.5, 0.5]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            PairBatch::new(vec![-0.1], vec![0.5]),
            Err(Error::OutOfRange { what: "distance", .. })
        ));
        assert!(matches!(
            PairBatch::new(vec![0.1], vec![1.2]),
            Err(Error::OutOfRange { what: "similarity", .. })
        ));
        assert!(matches!(
            PairBatch::new(vec![f64::NAN], vec![0.5]),
            Err(Error::OutOfRange { .. })
        ));
        let b = PairBatch::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(b.len(), 2);
        assert!(!b.is_empty());
    }

    #[test]
    fn soft_assign_at_left_edge() {
        let a = soft_assign(0.0, &bins(3, 2)).unwrap();
        assert_eq!(a.segment, 0);
        assert_eq!(a.lower, 1.0);
        assert_eq!(a.upper, 0.0);
        assert_eq!(a.dense(&bins(3, 2)), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn soft_assign_splits_between_bracketing_nodes() {
        // d = 0.25 with nodes {0, 0.5, 1}: halfway into the first segment.
        let a = soft_assign(0.25, &bins(3, 2)).unwrap();
        assert_eq!(a.segment, 0);
        assert_eq!(a.lower, 0.5);
        assert_eq!(a.upper, 0.5);
    }

    #[test]
    fn soft_assign_on_a_node_is_exact() {
        // d = 0.9 with 11 nodes sits exactly on node 9.
        let a = soft_assign(0.9, &bins(11, 2)).unwrap();
        assert_eq!(a.weight(9), 1.0);
        assert_eq!(a.weight(8), 0.0);
        assert_eq!(a.weight(10), 0.0);
        // The node is reached as the right endpoint of segment 8.
        assert_eq!(a.segment, 8);
        assert_eq!(a.upper, 1.0);
    }

    #[test]
    fn soft_assign_interior_node_resolves_left() {
        let a = soft_assign(0.5, &bins(3, 2)).unwrap();
        assert_eq!(a.segment, 0);
        assert_eq!(a.lower, 0.0);
        assert_eq!(a.upper, 1.0);
    }

    #[test]
    fn soft_assign_right_edge() {
        let a = soft_assign(1.0, &bins(5, 2)).unwrap();
        assert_eq!(a.segment, 3);
        assert_eq!(a.upper, 1.0);
        assert_eq!(a.weight(4), 1.0);
    }

    #[test]
    fn soft_assign_rejects_out_of_range() {
        assert!(matches!(
            soft_assign(-0.1, &bins(3, 2)),
            Err(Error::OutOfRange { what: "distance", .. })
        ));
        assert!(soft_assign(1.0 + 1e-12, &bins(3, 2)).is_err());
        assert!(soft_assign(f64::NAN, &bins(3, 2)).is_err());
    }

    #[test]
    fn soft_assign_partition_of_unity() {
        let c = bins(17, 2);
        for k in 0..=1000 {
            let d = k as f64 / 1000.0;
            let a = soft_assign(d, &c).unwrap();
            assert!((a.lower + a.upper - 1.0).abs() < 1e-15, "d = {d}");
            assert!(a.lower >= 0.0 && a.upper >= 0.0);
            assert!(a.segment + 1 < c.distance_bins());
        }
    }

    #[test]
    fn similarity_bin_endpoints_and_rounding() {
        let c = bins(2, 51);
        assert_eq!(similarity_bin(0.0, &c).unwrap(), 0);
        assert_eq!(similarity_bin(1.0, &c).unwrap(), 50);
        assert_eq!(similarity_bin(0.505, &c).unwrap(), 25);
    }

    #[test]
    fn similarity_bin_midpoint_goes_left() {
        // Nodes at {0, 0.5, 1}; 0.25 is equidistant from the first two.
        assert_eq!(similarity_bin(0.25, &bins(2, 3)).unwrap(), 0);
        assert_eq!(similarity_bin(0.75, &bins(2, 3)).unwrap(), 1);
        assert_eq!(similarity_bin(0.26, &bins(2, 3)).unwrap(), 1);
    }

    #[test]
    fn similarity_bin_rejects_out_of_range() {
        assert!(matches!(
            similarity_bin(1.5, &bins(2, 3)),
            Err(Error::OutOfRange { what: "similarity", .. })
        ));
    }

    #[test]
    fn joint_histogram_two_pairs_on_nodes() {
        let batch = PairBatch::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let grid = build_joint_histogram(&batch, &bins(2, 2));
        assert_eq!(grid.get(0, 1), 0.5);
        assert_eq!(grid.get(1, 0), 0.5);
        assert_eq!(grid.get(0, 0), 0.0);
        assert_eq!(grid.get(1, 1), 0.0);
    }

    #[test]
    fn joint_histogram_splits_single_pair() {
        let batch = PairBatch::new(vec![0.25], vec![0.0]).unwrap();
        let grid = build_joint_histogram(&batch, &bins(3, 2));
        assert_eq!(grid.get(0, 0), 0.5);
        assert_eq!(grid.get(1, 0), 0.5);
        assert_eq!(grid.total_mass(), 1.0);
    }

    #[test]
    fn joint_histogram_has_unit_mass() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = 1000;
        let d: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let s: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let batch = PairBatch::new(d, s).unwrap();
        let grid = build_joint_histogram(&batch, &bins(51, 51));
        assert!((grid.total_mass() - 1.0).abs() < 1e-12);
        assert!(grid.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn grid_from_values_validates() {
        let c = bins(2, 2);
        assert!(matches!(
            HistogramGrid::from_values(c, vec![0.0; 3]),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        ));
        assert!(HistogramGrid::from_values(c, vec![0.1, -0.1, 0.0, 0.0]).is_err());
        assert!(HistogramGrid::from_values(c, vec![0.1, f64::INFINITY, 0.0, 0.0]).is_err());
        let g = HistogramGrid::from_values(c, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.get(1, 0), 3.0);
        assert_eq!(g.total_mass(), 10.0);
    }

    #[test]
    fn binary_histograms_split_and_normalize() {
        let batch =
            PairBatch::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 0.0]).unwrap();
        let h = build_binary_histograms(&batch, &bins(3, 2)).unwrap();
        assert_eq!(h.h_pos(), &[0.5, 0.5, 0.0]);
        assert_eq!(h.h_neg(), &[0.0, 0.0, 1.0]);
        assert_eq!(h.count_pos(), 2);
        assert_eq!(h.count_neg(), 1);
    }

    #[test]
    fn binary_histograms_reject_fractional_similarity() {
        let batch = PairBatch::new(vec![0.1, 0.9], vec![1.0, 0.5]).unwrap();
        assert!(matches!(
            build_binary_histograms(&batch, &bins(3, 2)),
            Err(Error::NonBinarySimilarity { value }) if value == 0.5
        ));
    }

    #[test]
    fn binary_histograms_require_both_classes() {
        let batch = PairBatch::new(vec![0.1, 0.9], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            build_binary_histograms(&batch, &bins(3, 2)),
            Err(Error::MissingClass("dissimilar"))
        ));
        let batch = PairBatch::new(vec![0.1], vec![0.0]).unwrap();
        assert!(matches!(
            build_binary_histograms(&batch, &bins(3, 2)),
            Err(Error::MissingClass("similar"))
        ));
    }

    #[test]
    fn cumulative_tables_on_antidiagonal_grid() {
        // Mass 0.5 at (0, 1) and (1, 0).
        let g = HistogramGrid::from_values(bins(2, 2), vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let t = cumulative_tables(&g);
        assert_eq!(t.phi(0, 0), 0.5);
        assert_eq!(t.phi(1, 0), 0.0);
        assert_eq!(t.phi(0, 1), 0.0);
        assert_eq!(t.psi(1, 1), 0.5);
        assert_eq!(t.psi(0, 1), 0.0);
        assert_eq!(t.psi(0, 0), 0.0);
        assert_eq!(t.psi(1, 0), 0.0);
    }

    #[test]
    fn cumulative_tables_on_uniform_grid() {
        for (n, m) in [(2, 2), (3, 5), (8, 4)] {
            let total = (n * m) as f64;
            let g =
                HistogramGrid::from_values(bins(n, m), vec![1.0 / total; n * m]).unwrap();
            let t = cumulative_tables(&g);
            // phi at (0, 0) spans all rows and the m-1 higher similarity columns.
            let expected = (m - 1) as f64 / m as f64;
            assert!((t.phi(0, 0) - expected).abs() < 1e-15);
            for r in 0..n {
                assert_eq!(t.phi(r, m - 1), 0.0);
                assert_eq!(t.psi(r, 0), 0.0);
            }
        }
    }

    #[test]
    fn cumulative_tables_match_naive_sums() {
        // Independent quadruple-loop oracle on a fixed irregular grid.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &(n, m) in &[(2usize, 2usize), (5, 3), (4, 7), (16, 16)] {
            let values: Vec<f64> = (0..n * m).map(|_| rng.random::<f64>()).collect();
            let g = HistogramGrid::from_values(bins(n, m), values).unwrap();
            let t = cumulative_tables(&g);
            for r in 0..n {
                for z in 0..m {
                    let mut phi = 0.0;
                    let mut psi = 0.0;
                    for rp in 0..n {
                        for zp in 0..m {
                            if rp >= r && zp > z {
                                phi += g.get(rp, zp);
                            }
                            if rp <= r && zp < z {
                                psi += g.get(rp, zp);
                            }
                        }
                    }
                    assert!((t.phi(r, z) - phi).abs() < 1e-12, "phi at ({r},{z})");
                    assert!((t.psi(r, z) - psi).abs() < 1e-12, "psi at ({r},{z})");
                }
            }
        }
    }
}
