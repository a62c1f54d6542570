//! Labeled datasets: IDX image/label files and synthetic Gaussian blobs.
//!
//! The IDX layout is the classic big-endian one: a `u32` magic encoding the
//! element type and rank, one `u32` per dimension, then the raw payload.
//! Images use magic `0x00000803` (unsigned bytes, rank 3) and are scaled to
//! `[0, 1]` by dividing by 255; labels use `0x00000801`.

use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

const IDX_MAGIC_IMAGES: u32 = 0x0000_0803;
const IDX_MAGIC_LABELS: u32 = 0x0000_0801;

/// Feature vectors with integer class labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledDataset {
    /// Validates shape and labels: nonempty, equal lengths, a common input
    /// dimension, finite features, at least two classes, and every label in
    /// range.
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: labels.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::InvalidConfig("dataset must not be empty".into()));
        }
        if num_classes < 2 {
            return Err(Error::InvalidConfig(
                "dataset needs at least two classes".into(),
            ));
        }
        let dim = inputs[0].len();
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "inputs must have at least one feature".into(),
            ));
        }
        for x in &inputs {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(
                    "inputs must be finite".into(),
                ));
            }
        }
        for &label in &labels {
            if label >= num_classes {
                return Err(Error::InvalidLabel { label, num_classes });
            }
        }
        Ok(Self {
            inputs,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty datasets
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

fn read_be_u32(buf: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if buf.len() < end {
        return Err(Error::IdxTruncated {
            needed: end,
            got: buf.len(),
        });
    }
    Ok(u32::from_be_bytes(buf[offset..end].try_into().unwrap()))
}

fn parse_idx_images(buf: &[u8]) -> Result<Vec<Vec<f64>>> {
    let magic = read_be_u32(buf, 0)?;
    if magic != IDX_MAGIC_IMAGES {
        return Err(Error::IdxMagic {
            expected: IDX_MAGIC_IMAGES,
            got: magic,
        });
    }
    let count = read_be_u32(buf, 4)? as usize;
    let rows = read_be_u32(buf, 8)? as usize;
    let cols = read_be_u32(buf, 12)? as usize;
    let pixels = rows * cols;
    let needed = 16 + count * pixels;
    if buf.len() < needed {
        return Err(Error::IdxTruncated {
            needed,
            got: buf.len(),
        });
    }
    Ok(buf[16..needed]
        .chunks_exact(pixels.max(1))
        .take(count)
        .map(|img| img.iter().map(|&p| p as f64 / 255.0).collect())
        .collect())
}

fn parse_idx_labels(buf: &[u8]) -> Result<Vec<usize>> {
    let magic = read_be_u32(buf, 0)?;
    if magic != IDX_MAGIC_LABELS {
        return Err(Error::IdxMagic {
            expected: IDX_MAGIC_LABELS,
            got: magic,
        });
    }
    let count = read_be_u32(buf, 4)? as usize;
    let needed = 8 + count;
    if buf.len() < needed {
        return Err(Error::IdxTruncated {
            needed,
            got: buf.len(),
        });
    }
    Ok(buf[8..needed].iter().map(|&b| b as usize).collect())
}

/// Loads an IDX image file and its companion label file into a dataset.
/// Pixels scale to `[0, 1]`; the class count is the largest label plus one.
pub fn load_idx(images: &Path, labels: &Path) -> Result<LabeledDataset> {
    let inputs = parse_idx_images(&std::fs::read(images)?)?;
    let labels = parse_idx_labels(&std::fs::read(labels)?)?;
    if inputs.len() != labels.len() {
        return Err(Error::IdxCountMismatch {
            images: inputs.len(),
            labels: labels.len(),
        });
    }
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    LabeledDataset::new(inputs, labels, num_classes)
}

/// Generates `num_classes * per_class` points in `input_dim` dimensions.
/// Class `c` centers at `c` along the first coordinate (zero elsewhere) with
/// isotropic Gaussian noise of standard deviation `spread`; `spread = 0`
/// collapses every class onto its center. Deterministic in `seed`.
pub fn make_blobs(
    num_classes: usize,
    per_class: usize,
    input_dim: usize,
    spread: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if per_class == 0 {
        return Err(Error::InvalidConfig(
            "per_class must be at least 1".into(),
        ));
    }
    if input_dim == 0 {
        return Err(Error::InvalidConfig(
            "input_dim must be at least 1".into(),
        ));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::InvalidConfig(
            "spread must be a nonnegative finite number".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if spread > 0.0 {
        Some(Normal::new(0.0, spread).expect("validated parameters"))
    } else {
        None
    };
    let mut inputs = Vec::with_capacity(num_classes * per_class);
    let mut labels = Vec::with_capacity(num_classes * per_class);
    for class in 0..num_classes {
        for _ in 0..per_class {
            let mut x = vec![0.0; input_dim];
            x[0] = class as f64;
            if let Some(n) = &noise {
                for v in x.iter_mut() {
                    *v += n.sample(&mut rng);
                }
            }
            inputs.push(x);
            labels.push(class);
        }
    }
    LabeledDataset::new(inputs, labels, num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn dataset_validation() {
        assert!(LabeledDataset::new(vec![], vec![], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0]], vec![0, 1], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0], vec![2.0]], vec![0, 1], 1).is_err());
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0], vec![2.0]], vec![0, 2], 2),
            Err(Error::InvalidLabel { label: 2, num_classes: 2 })
        ));
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0], vec![2.0, 3.0]], vec![0, 1], 2),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(LabeledDataset::new(vec![vec![f64::NAN], vec![1.0]], vec![0, 1], 2).is_err());
        let d = LabeledDataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![1, 0], 2).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.input_dim(), 2);
        assert_eq!(d.label(0), 1);
        assert_eq!(d.input(1), &[3.0, 4.0]);
    }

    #[test]
    fn blobs_have_expected_layout() {
        let d = make_blobs(3, 50, 4, 0.1, 7).unwrap();
        assert_eq!(d.len(), 150);
        assert_eq!(d.input_dim(), 4);
        assert_eq!(d.num_classes(), 3);
        for class in 0..3 {
            let members: Vec<&[f64]> = (0..d.len())
                .filter(|&i| d.label(i) == class)
                .map(|i| d.input(i))
                .collect();
            assert_eq!(members.len(), 50);
            let mean_first: f64 =
                members.iter().map(|x| x[0]).sum::<f64>() / members.len() as f64;
            assert!(
                (mean_first - class as f64).abs() < 0.08,
                "class {class} mean {mean_first}"
            );
        }
        assert_eq!(d, make_blobs(3, 50, 4, 0.1, 7).unwrap());
        assert_ne!(d, make_blobs(3, 50, 4, 0.1, 8).unwrap());
    }

    #[test]
    fn zero_spread_collapses_classes() {
        let d = make_blobs(2, 3, 5, 0.0, 0).unwrap();
        for i in 0..3 {
            assert_eq!(d.input(i), &[0.0, 0.0, 0.0, 0.0, 0.0]);
        }
        for i in 3..6 {
            assert_eq!(d.input(i), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn blob_validation() {
        assert!(make_blobs(1, 5, 2, 0.1, 0).is_err());
        assert!(make_blobs(3, 0, 2, 0.1, 0).is_err());
        assert!(make_blobs(3, 5, 0, 0.1, 0).is_err());
        assert!(make_blobs(3, 5, 2, -0.1, 0).is_err());
        assert!(make_blobs(3, 5, 2, f64::NAN, 0).is_err());
    }

    fn idx_image_bytes(count: u32, rows: u32, cols: u32, payload: &[u8]) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&IDX_MAGIC_IMAGES.to_be_bytes());
        buf.extend_from_slice(&count.to_be_bytes());
        buf.extend_from_slice(&rows.to_be_bytes());
        buf.extend_from_slice(&cols.to_be_bytes());
        buf.extend_from_slice(payload);
        buf
    }

    fn idx_label_bytes(labels: &[u8]) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&IDX_MAGIC_LABELS.to_be_bytes());
        buf.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        buf.extend_from_slice(labels);
        buf
    }

    fn write_temp(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        path
    }

    #[test]
    fn idx_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let payload: Vec<u8> = (0..12).collect();
        let images = write_temp(&dir, "img", &idx_image_bytes(2, 2, 3, &payload));
        let labels = write_temp(&dir, "lbl", &idx_label_bytes(&[0, 1]));
        let d = load_idx(&images, &labels).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.input_dim(), 6);
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.label(1), 1);
        for k in 0..6 {
            assert_eq!(d.input(0)[k], k as f64 / 255.0);
            assert_eq!(d.input(1)[k], (k + 6) as f64 / 255.0);
        }
    }

    #[test]
    fn idx_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = idx_image_bytes(1, 1, 1, &[42]);
        bytes[3] = 0x02;
        let images = write_temp(&dir, "img", &bytes);
        let labels = write_temp(&dir, "lbl", &idx_label_bytes(&[0]));
        assert!(matches!(
            load_idx(&images, &labels),
            Err(Error::IdxMagic { expected: 0x0000_0803, got: 0x0000_0802 })
        ));
    }

    #[test]
    fn idx_rejects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        // Declares 2 images of 4 pixels but carries only 5 bytes.
        let images = write_temp(&dir, "img", &idx_image_bytes(2, 2, 2, &[1, 2, 3, 4, 5]));
        let labels = write_temp(&dir, "lbl", &idx_label_bytes(&[0, 1]));
        assert!(matches!(
            load_idx(&images, &labels),
            Err(Error::IdxTruncated { needed: 24, got: 21 })
        ));
        // Header cut short.
        let stub = write_temp(&dir, "stub", &[0, 0, 8]);
        assert!(matches!(
            load_idx(&stub, &labels),
            Err(Error::IdxTruncated { .. })
        ));
    }

    #[test]
    fn idx_rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let images = write_temp(&dir, "img", &idx_image_bytes(2, 1, 2, &[1, 2, 3, 4]));
        let labels = write_temp(&dir, "lbl", &idx_label_bytes(&[0, 1, 0]));
        assert!(matches!(
            load_idx(&images, &labels),
            Err(Error::IdxCountMismatch { images: 2, labels: 3 })
        ));
    }

    #[test]
    fn idx_missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let labels = write_temp(&dir, "lbl", &idx_label_bytes(&[0, 1]));
        let missing = dir.path().join("nope");
        assert!(matches!(
            load_idx(&missing, &labels),
            Err(Error::Io(_))
        ));
    }
}
