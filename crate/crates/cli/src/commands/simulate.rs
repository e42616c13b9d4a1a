use super::fmt;
use crate::error::{CliError, Result};
use crate::manifest::{emit, RunManifest};
use crate::{quantum_fidelity, ChannelArgs, Common};
use clap::{Args, ValueEnum};
use qthermal::channel::fidelity_classical;
use qthermal::cnn::{load_checkpoint, save_checkpoint, train, CnnClassifier, Network, NetworkSpec, TrainConfig};
use qthermal::sim::advantage::{advantage_regions, write_csv, AdvantageConfig, AdvantageRow};
use qthermal::sim::dataset::{load_mnist, Split};
use qthermal::sim::{BinaryImageDataset, NearestNeighbour, NoiseModel};
use qthermal::Execution;
use std::path::PathBuf;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Nn,
    Cnn,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSource {
    /// The evaluation files (`t10k-*`).
    Test,
    /// The first images of the training set in use.
    Train,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "nn")]
    pub classifier: ClassifierKind,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Probe copies per pixel: list and/or `start:stop[:step]` ranges.
    #[arg(long = "M")]
    pub copies: String,
    /// Training images to use (default: all).
    #[arg(long = "T")]
    pub training_size: Option<usize>,
    /// Noisy copies of every evaluation image.
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory with the four MNIST-layout IDX files (optionally gzipped).
    #[arg(long, env = "QTHERMAL_MNIST_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    pub eval: EvalSource,
    /// Evaluation images to use (default: all).
    #[arg(long)]
    pub eval_count: Option<usize>,
    /// Grey level at or above which a pixel is a target.
    #[arg(long, default_value_t = qthermal::sim::dataset::DEFAULT_THRESHOLD)]
    pub threshold: u8,
    /// Use this flip probability for every bound endpoint.
    #[arg(long = "p-override")]
    pub p_override: Option<f64>,
    /// CNN: training epochs.
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    /// CNN: SGD learning rate.
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    /// CNN: mini-batch size.
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch: usize,
    /// CNN: fraction of training images held out for epoch selection.
    #[arg(long, default_value_t = TrainConfig::default().holdout_fraction)]
    pub holdout: f64,
    /// CNN: flip probability of the training noise (0 trains on clean images).
    #[arg(long = "train-p", default_value_t = 0.0)]
    pub train_p: f64,
    /// CNN: skip training and load parameters from this checkpoint.
    #[arg(long)]
    pub load_checkpoint: Option<PathBuf>,
    /// CNN: write the trained parameters here.
    #[arg(long)]
    pub save_checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn datasets(args: &SimulateArgs) -> Result<(BinaryImageDataset, BinaryImageDataset)> {
    let dir = args
        .data_dir
        .as_ref()
        .ok_or_else(|| CliError::Data("no dataset directory: pass --data-dir or set QTHERMAL_MNIST_DIR".into()))?;
    let full = load_mnist(dir, Split::Training, args.threshold)?;
    let training = match args.training_size {
        Some(t) if t > full.len() => {
            return Err(CliError::Data(format!(
                "--T {t} exceeds the {} training images available",
                full.len()
            )))
        }
        Some(t) => full.take(t),
        None => full,
    };
    let mut evaluation = match args.eval {
        EvalSource::Test => load_mnist(dir, Split::Evaluation, args.threshold)?,
        EvalSource::Train => training.clone(),
    };
    if let Some(n) = args.eval_count {
        if n > evaluation.len() {
            return Err(CliError::Data(format!(
                "--eval-count {n} exceeds the {} images available",
                evaluation.len()
            )));
        }
        evaluation = evaluation.take(n);
    }
    Ok((training, evaluation))
}

fn cnn_classifier(args: &SimulateArgs, training: &BinaryImageDataset, m: &mut RunManifest) -> Result<CnnClassifier> {
    let net = Network::new(NetworkSpec::mnist_default(
        training.height(),
        training.width(),
        training.classes(),
    ))?;
    m.param("network", net.spec().canonical());
    if let Some(path) = &args.load_checkpoint {
        let params = load_checkpoint(&net, path)?;
        m.param("load_checkpoint", path.display());
        return Ok(CnnClassifier::new(net, params)?);
    }
    let config = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
        holdout_fraction: args.holdout,
        noisy_training: args.train_p > 0.0,
        exec: Execution::Parallel,
    };
    let noise = NoiseModel::flip(args.train_p)?;
    let trained = train(&net, training, &noise, &config)?;
    for s in &trained.trace {
        eprintln!(
            "epoch {}: loss {:.5} train acc {:.4} selection acc {:.4}",
            s.epoch, s.mean_loss, s.train_accuracy, s.selection_accuracy
        );
    }
    m.param("epochs", args.epochs)
        .param("lr", fmt(args.lr))
        .param("batch", args.batch)
        .param("holdout", fmt(args.holdout))
        .param("train_p", fmt(args.train_p))
        .param("best_epoch", trained.best_epoch);
    if let Some(path) = &args.save_checkpoint {
        save_checkpoint(&net, trained.classifier.params(), path)?;
    }
    Ok(trained.classifier)
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let copies = crate::grid::integers("M", &args.copies)?;
    if copies.contains(&0) {
        return Err(CliError::Usage("--M values must be at least 1".into()));
    }
    let pair = args.channel.pair()?;
    let f_q = quantum_fidelity(&pair)?;
    let f_cl = fidelity_classical(&pair)?;
    let (training, evaluation) = datasets(args)?;

    let mut m = RunManifest::new("simulate");
    args.channel.record(&mut m);
    m.param("classifier", format!("{:?}", args.classifier).to_lowercase())
        .param("M", &args.copies)
        .param("T", training.len())
        .param("eval", format!("{:?}", args.eval).to_lowercase())
        .param("eval_count", evaluation.len())
        .param("threshold", args.threshold)
        .param("trials", args.trials)
        .param("p_override", args.p_override.map(fmt).unwrap_or_default())
        .param("F_q", fmt(f_q))
        .param("F_cl", fmt(f_cl));
    m.seeds.insert("master".into(), args.seed);
    m.inputs = training.provenance.files.clone();
    for f in &evaluation.provenance.files {
        if !m.inputs.contains(f) {
            m.inputs.push(f.clone());
        }
    }

    let config = AdvantageConfig {
        trials: args.trials,
        seed: args.seed,
        exec: Execution::Parallel,
        p_override: args.p_override,
    };
    let rows: Vec<AdvantageRow> = match args.classifier {
        ClassifierKind::Nn => {
            let nn = NearestNeighbour::new(&training)?;
            advantage_regions(&nn, &evaluation, f_q, f_cl, &copies, &config)?
        }
        ClassifierKind::Cnn => {
            let cnn = cnn_classifier(args, &training, &mut m)?;
            advantage_regions(&cnn, &evaluation, f_q, f_cl, &copies, &config)?
        }
    };
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    emit(args.common.out.as_deref(), &csv, &m)
}
