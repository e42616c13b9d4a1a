//! Pattern recognition on binarised images corrupted by channel-induced
//! pixel noise.
//!
//! Images are bit-packed (`u64` words, pixel `i` at bit `i % 64` of word
//! `i / 64`, row-major). Noise is an independent symmetric flip of every
//! pixel with a probability taken from the single-pixel error bounds.

pub mod advantage;
pub mod dataset;
pub mod estimate;
pub mod idx;
pub mod nn;
pub mod noise;
pub mod snapp;

pub use advantage::{advantage_regions, AdvantageRow};
pub use dataset::{binarize, BinaryImageDataset, Provenance};
pub use estimate::{estimate_error, Classifier, ErrorEstimate};
pub use nn::{nn_classify, NearestNeighbour};
pub use noise::{sample_noisy, NoiseDerivation, NoiseModel};
pub use snapp::{snapp_fit, SnappFit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Idx(#[from] idx::IdxError),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("flip probability {0} outside [0, 1/2]")]
    InvalidNoise(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {needed} distinct sample sizes, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("design matrix is singular (rank {rank} of {cols})")]
    SingularDesign { rank: usize, cols: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Bounds(#[from] crate::bounds::FunctionalError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
}

pub type Result<T> = std::result::Result<T, SimError>;
