//! MNIST IDX containers, class filtering and PCA feature preparation.

use crate::error::{Error, Result};
use crate::io::{FeatureHeader, FeatureRow, FeatureSet};
use crate::pca::{fit_pca, PcaModel, DEFAULT_COMPONENTS};
use crate::train::{rng_for, streams, subsample};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const DEFAULT_CLASSES: [u8; 4] = [0, 1, 2, 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImageSet {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels, image after image.
    pub pixels: Vec<u8>,
}

impl RawImageSet {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Pixels scaled to [0, 1].
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        (0..self.count)
            .map(|i| self.image(i).iter().map(|&p| p as f64 / 255.0).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Images(RawImageSet),
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::IdxTruncated { expected: offset + 4, actual: bytes.len() })
}

fn check_payload(bytes: &[u8], header: usize, payload: usize) -> Result<()> {
    let expected = header + payload;
    if bytes.len() < expected {
        return Err(Error::IdxTruncated { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::IdxTrailing { expected, extra: bytes.len() - expected });
    }
    Ok(())
}

/// Parses an uncompressed IDX image (`0x803`) or label (`0x801`) file.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    match read_u32(bytes, 0)? {
        IMAGE_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            let rows = read_u32(bytes, 8)? as usize;
            let cols = read_u32(bytes, 12)? as usize;
            check_payload(bytes, 16, count * rows * cols)?;
            Ok(IdxData::Images(RawImageSet { count, rows, cols, pixels: bytes[16..].to_vec() }))
        }
        LABEL_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            check_payload(bytes, 8, count)?;
            let labels = bytes[8..].to_vec();
            if let Some(pos) = labels.iter().position(|&l| l > 9) {
                return Err(Error::IdxLabel { offset: 8 + pos, value: labels[pos] });
            }
            Ok(IdxData::Labels(labels))
        }
        found => Err(Error::IdxMagic { found }),
    }
}

pub fn parse_images(bytes: &[u8]) -> Result<RawImageSet> {
    match parse_idx(bytes)? {
        IdxData::Images(set) => Ok(set),
        IdxData::Labels(_) => Err(Error::IdxMagic { found: LABEL_MAGIC }),
    }
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    match parse_idx(bytes)? {
        IdxData::Labels(labels) => Ok(labels),
        IdxData::Images(_) => Err(Error::IdxMagic { found: IMAGE_MAGIC }),
    }
}

/// Inverse of [`parse_idx`].
pub fn serialize_idx(data: &IdxData) -> Vec<u8> {
    let mut out = Vec::new();
    match data {
        IdxData::Images(set) => {
            for v in [IMAGE_MAGIC, set.count as u32, set.rows as u32, set.cols as u32] {
                out.extend_from_slice(&v.to_be_bytes());
            }
            out.extend_from_slice(&set.pixels);
        }
        IdxData::Labels(labels) => {
            for v in [LABEL_MAGIC, labels.len() as u32] {
                out.extend_from_slice(&v.to_be_bytes());
            }
            out.extend_from_slice(labels);
        }
    }
    out
}

/// Indices of the examples whose label is in `keep`, in original order.
pub fn kept_indices(labels: &[u8], keep: &[u8]) -> Vec<usize> {
    labels.iter().enumerate().filter(|(_, l)| keep.contains(l)).map(|(i, _)| i).collect()
}

/// Keeps the listed digits and relabels them by their position in `keep`.
pub fn filter_classes(images: &RawImageSet, labels: &[u8], keep: &[u8]) -> Result<(RawImageSet, Vec<usize>)> {
    if images.count != labels.len() {
        return Err(Error::Dimension { expected: images.count, actual: labels.len() });
    }
    let idx = kept_indices(labels, keep);
    let mut pixels = Vec::with_capacity(idx.len() * images.pixels_per_image());
    for &i in &idx {
        pixels.extend_from_slice(images.image(i));
    }
    let remapped = idx
        .iter()
        .map(|&i| keep.iter().position(|&k| k == labels[i]).expect("kept label"))
        .collect();
    Ok((RawImageSet { count: idx.len(), rows: images.rows, cols: images.cols, pixels }, remapped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub digits: Vec<u8>,
    pub components: usize,
    /// Seeded random subset sizes; `None` keeps every example.
    pub train_size: Option<usize>,
    pub test_size: Option<usize>,
    pub seed: u64,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            digits: DEFAULT_CLASSES.to_vec(),
            components: DEFAULT_COMPONENTS,
            train_size: None,
            test_size: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreparedFeatures {
    pub pca: PcaModel,
    pub train: FeatureSet,
    pub test: FeatureSet,
}

/// One labelled split: images, labels, and a fingerprint of the source
/// files recorded in the feature header.
pub struct LabelledImages<'a> {
    pub images: &'a RawImageSet,
    pub labels: &'a [u8],
    pub fingerprint: String,
}

/// Filter to the kept digits, optionally subsample, fit PCA and min-max
/// scaling on the training split only, and transform both splits.
pub fn prepare_features(train: LabelledImages, test: LabelledImages, opts: &PrepareOptions) -> Result<PreparedFeatures> {
    if opts.digits.is_empty() || opts.digits.iter().any(|&d| d > 9) {
        return Err(Error::InvalidArgument(format!("digits must be in 0..=9, got {:?}", opts.digits)));
    }
    let mut rng = rng_for(opts.seed, streams::SUBSAMPLE);
    let mut split = |part: &LabelledImages, size: Option<usize>| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let (kept, labels) = filter_classes(part.images, part.labels, &opts.digits)?;
        let x = kept.normalized();
        Ok(match size {
            Some(n) => {
                let keep = subsample(x.len(), n, &mut rng);
                (keep.iter().map(|&i| x[i].clone()).collect(), keep.iter().map(|&i| labels[i]).collect())
            }
            None => (x, labels),
        })
    };
    let (train_x, train_y) = split(&train, opts.train_size)?;
    let (test_x, test_y) = split(&test, opts.test_size)?;
    if train_x.is_empty() {
        return Err(Error::EmptyDataset("no training images of the requested digits"));
    }
    let pca = fit_pca(&train_x, opts.components)?;
    let to_set = |name: &str, x: &[Vec<f64>], y: &[usize], fp: &str| -> Result<FeatureSet> {
        let rows = pca
            .transform(x)?
            .into_iter()
            .zip(y)
            .map(|(features, &label)| FeatureRow { features, label })
            .collect();
        Ok(FeatureSet { header: FeatureHeader::new(name, opts.components, &opts.digits, fp.to_string()), rows })
    };
    let train_set = to_set("train", &train_x, &train_y, &train.fingerprint)?;
    let test_set = to_set("test", &test_x, &test_y, &test.fingerprint)?;
    Ok(PreparedFeatures { pca, train: train_set, test: test_set })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_fixture() {
        let bytes = [0, 0, 8, 1, 0, 0, 0, 2, 3, 1];
        assert_eq!(parse_idx(&bytes).unwrap(), IdxData::Labels(vec![3, 1]));
    }

    #[test]
    fn image_fixture() {
        let bytes = [0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 7, 9];
        let set = parse_images(&bytes).unwrap();
        assert_eq!((set.count, set.rows, set.cols), (1, 2, 2));
        assert_eq!(set.image(0), &[0, 255, 7, 9]);
        assert_eq!(set.normalized()[0][1], 1.0);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(parse_idx(&[0, 0, 8, 1, 0, 0, 0, 2, 3]), Err(Error::IdxTruncated { expected: 10, actual: 9 })));
        assert!(matches!(parse_idx(&[0, 0, 8, 1, 0, 0, 0, 1, 3, 1]), Err(Error::IdxTrailing { extra: 1, .. })));
        assert!(matches!(parse_idx(&[0, 0, 8, 2, 0, 0, 0, 0]), Err(Error::IdxMagic { found: 0x802 })));
        assert!(matches!(parse_idx(&[0, 0, 8, 1, 0, 0, 0, 2, 3, 10]), Err(Error::IdxLabel { offset: 9, value: 10 })));
        assert!(matches!(parse_idx(&[0, 0]), Err(Error::IdxTruncated { .. })));
    }

    #[test]
    fn filter_keeps_order_and_remaps() {
        assert_eq!(kept_indices(&[0, 7, 2, 9, 3], &DEFAULT_CLASSES), vec![0, 2, 4]);
        let images = RawImageSet { count: 5, rows: 1, cols: 1, pixels: vec![10, 11, 12, 13, 14] };
        let (kept, labels) = filter_classes(&images, &[0, 7, 2, 9, 3], &DEFAULT_CLASSES).unwrap();
        assert_eq!(kept.pixels, vec![10, 12, 14]);
        assert_eq!(labels, vec![0, 2, 3]);
        let (none, l) = filter_classes(&images, &[4, 5, 6, 7, 8], &DEFAULT_CLASSES).unwrap();
        assert_eq!((none.count, l.len()), (0, 0));
    }
}
