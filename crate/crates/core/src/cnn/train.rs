use super::net::{unpack_real, CnnClassifier, Network};
use super::{CnnError, Result};
use crate::exec::Execution;
use crate::sim::estimate::{estimate_classifier_error, ErrorEstimate};
use crate::sim::noise::{sample_noisy, stream_rng, NoiseModel, StreamPurpose};
use crate::sim::BinaryImageDataset;
use rand::seq::SliceRandom;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Step size applied to the batch-mean gradient. Zero freezes the
    /// parameters.
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Share of the training set held out for epoch selection. With no
    /// held-out images, epochs are ranked by accuracy on the fit set.
    pub holdout_fraction: f64,
    /// Draw a fresh noisy copy of every training image each epoch; clean
    /// images otherwise.
    pub noisy_training: bool,
    pub exec: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            batch_size: 32,
            epochs: 5,
            seed: 0,
            holdout_fraction: 0.1,
            noisy_training: true,
            exec: Execution::Parallel,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(CnnError::InvalidConfig(msg.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad("holdout fraction must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's batches.
    pub mean_loss: f64,
    /// Share of items predicted correctly before each batch update.
    pub train_accuracy: f64,
    /// Accuracy after the epoch on the selection set.
    pub selection_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedNetwork {
    pub classifier: CnnClassifier,
    pub trace: Vec<EpochStats>,
    /// Epoch whose parameters were kept; 0 when no epoch ran.
    pub best_epoch: usize,
    /// Whether epochs were ranked on held-out images.
    pub selected_on_holdout: bool,
}

fn input_of(data: &BinaryImageDataset, i: usize, noise: Option<(&NoiseModel, u64, StreamPurpose, u32)>) -> Vec<f64> {
    let m = data.pixels();
    match noise {
        Some((model, seed, purpose, trial)) if model.p() > 0.0 => {
            let mut noisy = vec![0u64; data.words()];
            let mut rng = stream_rng(seed, purpose, trial, i as u32);
            sample_noisy(data.image(i), m, model.p(), &mut rng, &mut noisy);
            unpack_real(&noisy, m)
        }
        _ => unpack_real(data.image(i), m),
    }
}

/// Trains from He-uniform initial weights with plain mini-batch SGD and
/// keeps the parameters of the epoch with the best selection accuracy
/// (earliest on ties).
pub fn train(
    network: &Network,
    training: &BinaryImageDataset,
    noise: &NoiseModel,
    config: &TrainConfig,
) -> Result<TrainedNetwork> {
    config.validate()?;
    if training.is_empty() {
        return Err(CnnError::Sim(crate::sim::SimError::EmptyTrainingSet));
    }
    let spec = network.spec();
    if (training.height(), training.width()) != (spec.height, spec.width) {
        return Err(CnnError::ShapeMismatch(format!(
            "network expects {}×{} images, dataset has {}×{}",
            spec.height,
            spec.width,
            training.height(),
            training.width()
        )));
    }
    if let Some(&l) = training.labels().iter().find(|&&l| l as usize >= spec.classes) {
        return Err(CnnError::ShapeMismatch(format!(
            "label {l} with {} classes",
            spec.classes
        )));
    }
    let seed = config.seed;
    let mut order: Vec<usize> = (0..training.len()).collect();
    order.shuffle(&mut stream_rng(seed, StreamPurpose::Holdout, 0, 0));
    let n_hold = ((training.len() as f64) * config.holdout_fraction).floor() as usize;
    let (holdout, fit) = order.split_at(n_hold.min(training.len() - 1));
    let mut fit = fit.to_vec();
    fit.sort_unstable();

    let train_noise = config.noisy_training.then_some(noise);
    let selection: Vec<(Vec<f64>, usize)> = {
        let ids = if holdout.is_empty() { &fit[..] } else { holdout };
        config.exec.map(ids.len(), |k| {
            let i = ids[k];
            let x = input_of(training, i, train_noise.map(|n| (n, seed, StreamPurpose::Holdout, 1)));
            (x, training.label(i) as usize)
        })
    };

    let mut params = network.init_params(seed);
    let mut best = (params.clone(), 0usize, f64::NEG_INFINITY);
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let trial = epoch as u32;
        fit.shuffle(&mut stream_rng(seed, StreamPurpose::Shuffle, trial, 0));
        let (mut loss_sum, mut correct, mut batches) = (0.0, 0usize, 0usize);
        for ids in fit.chunks(config.batch_size) {
            let inputs = config.exec.map(ids.len(), |k| {
                input_of(
                    training,
                    ids[k],
                    train_noise.map(|n| (n, seed, StreamPurpose::Training, trial)),
                )
            });
            let batch: Vec<(&[f64], usize)> = inputs
                .iter()
                .zip(ids)
                .map(|(x, &i)| (x.as_slice(), training.label(i) as usize))
                .collect();
            let (loss, grad, c) = network.batch_pass(&params, &batch, config.exec)?;
            let step = config.learning_rate / ids.len() as f64;
            if step != 0.0 {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= step * g;
                }
            }
            loss_sum += loss / ids.len() as f64;
            correct += c;
            batches += 1;
        }
        let right = config.exec.sum_u64(selection.len(), |k| {
            let (x, label) = &selection[k];
            (network.predict(&params, x).unwrap() == *label) as u64
        });
        let stats = EpochStats {
            epoch,
            mean_loss: loss_sum / batches as f64,
            train_accuracy: correct as f64 / fit.len() as f64,
            selection_accuracy: right as f64 / selection.len() as f64,
        };
        if stats.selection_accuracy > best.2 {
            best = (params.clone(), epoch, stats.selection_accuracy);
        }
        trace.push(stats);
    }
    Ok(TrainedNetwork {
        classifier: CnnClassifier::new(network.clone(), best.0)?,
        trace,
        best_epoch: best.1,
        selected_on_holdout: !holdout.is_empty(),
    })
}

/// Monte Carlo misclassification rate of the network under pixel noise.
pub fn evaluate(
    classifier: &CnnClassifier,
    evaluation: &BinaryImageDataset,
    noise: &NoiseModel,
    trials: u32,
    seed: u64,
    exec: Execution,
) -> Result<ErrorEstimate> {
    let spec = classifier.network().spec();
    if (evaluation.height(), evaluation.width()) != (spec.height, spec.width) {
        return Err(CnnError::ShapeMismatch(format!(
            "network expects {}×{} images, dataset has {}×{}",
            spec.height,
            spec.width,
            evaluation.height(),
            evaluation.width()
        )));
    }
    Ok(estimate_classifier_error(
        classifier, evaluation, noise, trials, seed, exec,
    )?)
}
