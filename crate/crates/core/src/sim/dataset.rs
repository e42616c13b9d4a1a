//! Labelled binary images.

use super::idx::{self, IdxImages};
use super::{Result, SimError};
use std::path::Path;

pub const DEFAULT_THRESHOLD: u8 = 128;

pub const MNIST_TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const MNIST_TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const MNIST_TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const MNIST_TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Where a dataset came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    /// `(file name, sha256 of the file as stored)`.
    pub files: Vec<(String, String)>,
    pub threshold: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryImageDataset {
    height: usize,
    width: usize,
    words: usize,
    classes: usize,
    bits: Vec<u64>,
    labels: Vec<u8>,
    pub provenance: Provenance,
}

/// `pixel ≥ threshold` becomes a target (1), anything else background (0).
pub fn binarize(image: &[u8], threshold: u8) -> Vec<u64> {
    let mut out = vec![0u64; image.len().div_ceil(64)];
    for (i, &px) in image.iter().enumerate() {
        if px >= threshold {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Expands a packed image to `m` zeros and ones.
pub fn unpack(bits: &[u64], m: usize) -> Vec<u8> {
    (0..m).map(|i| ((bits[i / 64] >> (i % 64)) & 1) as u8).collect()
}

impl BinaryImageDataset {
    /// Builds a dataset from unpacked `0/1` pixel rows.
    pub fn from_pixels(height: usize, width: usize, classes: usize, images: &[Vec<u8>], labels: &[u8]) -> Result<Self> {
        let m = height * width;
        let mut bits = Vec::new();
        for im in images {
            if im.len() != m {
                return Err(SimError::ShapeMismatch(format!(
                    "image has {} pixels, expected {m}",
                    im.len()
                )));
            }
            bits.extend(binarize(im, 1));
        }
        Self::from_bits(
            height,
            width,
            classes,
            bits,
            labels.to_vec(),
            Provenance {
                files: Vec::new(),
                threshold: 1,
            },
        )
    }

    pub fn from_idx(
        images: &IdxImages,
        labels: &[u8],
        threshold: u8,
        classes: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        if images.count != labels.len() {
            return Err(SimError::ShapeMismatch(format!(
                "{} images but {} labels",
                images.count,
                labels.len()
            )));
        }
        let bits = (0..images.count)
            .flat_map(|i| binarize(images.image(i), threshold))
            .collect();
        Self::from_bits(
            images.rows,
            images.cols,
            classes,
            bits,
            labels.to_vec(),
            Provenance {
                threshold,
                ..provenance
            },
        )
    }

    fn from_bits(
        height: usize,
        width: usize,
        classes: usize,
        bits: Vec<u64>,
        labels: Vec<u8>,
        provenance: Provenance,
    ) -> Result<Self> {
        let words = (height * width).div_ceil(64);
        if words == 0 {
            return Err(SimError::ShapeMismatch("images have no pixels".into()));
        }
        if bits.len() != words * labels.len() {
            return Err(SimError::ShapeMismatch("label count differs from image count".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(SimError::ShapeMismatch(format!(
                "label {bad} not below class count {classes}"
            )));
        }
        Ok(Self {
            height,
            width,
            words,
            classes,
            bits,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pixel count `m`.
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Words per packed image.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn image(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut bits = Vec::with_capacity(indices.len() * self.words);
        for &i in indices {
            bits.extend_from_slice(self.image(i));
        }
        Self {
            bits,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ..self.clone_shape()
        }
    }

    /// The first `n` images.
    pub fn take(&self, n: usize) -> Self {
        let n = n.min(self.len());
        self.subset(&(0..n).collect::<Vec<_>>())
    }

    /// The first `per_class` images of every class, in dataset order.
    pub fn balanced(&self, per_class: usize) -> Self {
        let mut seen = vec![0usize; self.classes];
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let c = self.labels[i] as usize;
                seen[c] += 1;
                seen[c] <= per_class
            })
            .collect();
        self.subset(&idx)
    }

    /// Images per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    fn clone_shape(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            words: self.words,
            classes: self.classes,
            bits: Vec::new(),
            labels: Vec::new(),
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Training,
    Evaluation,
}

fn find_file(dir: &Path, stem: &str) -> Result<std::path::PathBuf> {
    for name in [format!("{stem}.gz"), stem.to_string()] {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(SimError::Idx(idx::IdxError::Io {
        path: dir.join(stem).display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found (also tried .gz)"),
    }))
}

/// Loads one split of an MNIST-layout directory (the four standard file
/// names, optionally gzipped).
pub fn load_mnist(dir: &Path, split: Split, threshold: u8) -> Result<BinaryImageDataset> {
    let (im_stem, lb_stem) = match split {
        Split::Training => (MNIST_TRAIN_IMAGES, MNIST_TRAIN_LABELS),
        Split::Evaluation => (MNIST_TEST_IMAGES, MNIST_TEST_LABELS),
    };
    let im_path = find_file(dir, im_stem)?;
    let lb_path = find_file(dir, lb_stem)?;
    let (im_bytes, im_digest) = idx::read_file(&im_path)?;
    let (lb_bytes, lb_digest) = idx::read_file(&lb_path)?;
    let images = idx::parse_idx_images(&im_bytes)?;
    let labels = idx::parse_idx_labels(&lb_bytes)?;
    let name = |p: &Path| p.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let provenance = Provenance {
        files: vec![(name(&im_path), im_digest), (name(&lb_path), lb_digest)],
        threshold,
    };
    BinaryImageDataset::from_idx(&images, &labels, threshold, 10, provenance)
}
