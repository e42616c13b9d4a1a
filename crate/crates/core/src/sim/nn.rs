//! Nearest-neighbour classification under Hamming distance.

use super::dataset::BinaryImageDataset;
use super::estimate::Classifier;
use super::{Result, SimError};

pub fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Label of the closest training image; ties go to the lowest index.
pub fn nn_classify(query: &[u64], training: &BinaryImageDataset) -> Result<u8> {
    if training.is_empty() {
        return Err(SimError::EmptyTrainingSet);
    }
    Ok(training.label(nearest(query, training)))
}

fn nearest(query: &[u64], training: &BinaryImageDataset) -> usize {
    let mut best = (u32::MAX, 0);
    for i in 0..training.len() {
        let d = hamming(query, training.image(i));
        if d < best.0 {
            best = (d, i);
            if d == 0 {
                break;
            }
        }
    }
    best.1
}

pub struct NearestNeighbour<'a> {
    training: &'a BinaryImageDataset,
}

impl<'a> NearestNeighbour<'a> {
    pub fn new(training: &'a BinaryImageDataset) -> Result<Self> {
        if training.is_empty() {
            return Err(SimError::EmptyTrainingSet);
        }
        Ok(Self { training })
    }
}

impl Classifier for NearestNeighbour<'_> {
    fn classify(&self, image: &[u64]) -> usize {
        self.training.label(nearest(image, self.training)) as usize
    }
}
