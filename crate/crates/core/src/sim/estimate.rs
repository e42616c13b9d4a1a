//! Monte Carlo misclassification rates.

use super::dataset::BinaryImageDataset;
use super::noise::{sample_noisy, stream_rng, NoiseModel, StreamPurpose};
use super::{Result, SimError};
use crate::exec::Execution;

/// Anything that labels a packed binary image.
pub trait Classifier: Sync {
    fn classify(&self, image: &[u64]) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub mean: f64,
    /// Sample standard deviation of the error indicators over `√samples`.
    pub stderr: f64,
    pub errors: u64,
    pub samples: u64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = errors as f64 / n;
        let stderr = if samples > 1 {
            let var = (errors as f64 * (n - errors as f64) / n) / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            errors,
            samples,
        }
    }
}

/// Error rate of `classifier` on `trials` noisy copies of every evaluation
/// image. Sample `(t, i)` uses stream `(seed, t, i)`; errors are counted as
/// integers, so the result does not depend on scheduling.
pub fn estimate_classifier_error<C: Classifier + ?Sized>(
    classifier: &C,
    evaluation: &BinaryImageDataset,
    noise: &NoiseModel,
    trials: u32,
    seed: u64,
    exec: Execution,
) -> Result<ErrorEstimate> {
    if evaluation.is_empty() {
        return Err(SimError::EmptyEvaluationSet);
    }
    if trials == 0 {
        return Err(SimError::Invalid("need at least one trial".into()));
    }
    let n = evaluation.len();
    let m = evaluation.pixels();
    let words = evaluation.words();
    let p = noise.p();
    let errors = exec.sum_u64(trials as usize * n, |k| {
        let (t, i) = (k / n, k % n);
        let mut noisy = vec![0u64; words];
        let mut rng = stream_rng(seed, StreamPurpose::Evaluation, t as u32, i as u32);
        sample_noisy(evaluation.image(i), m, p, &mut rng, &mut noisy);
        (classifier.classify(&noisy) != evaluation.label(i) as usize) as u64
    });
    Ok(ErrorEstimate::from_counts(errors, trials as u64 * n as u64))
}

/// Nearest-neighbour error rate with `training` as the reference set.
pub fn estimate_error(
    training: &BinaryImageDataset,
    evaluation: &BinaryImageDataset,
    noise: &NoiseModel,
    trials: u32,
    seed: u64,
    exec: Execution,
) -> Result<ErrorEstimate> {
    let nn = super::nn::NearestNeighbour::new(training)?;
    if training.words() != evaluation.words() {
        return Err(SimError::ShapeMismatch(format!(
            "training images have {} pixels, evaluation images {}",
            training.pixels(),
            evaluation.pixels()
        )));
    }
    estimate_classifier_error(&nn, evaluation, noise, trials, seed, exec)
}
