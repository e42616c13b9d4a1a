//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use qthermal::cnn::{gradient_check, ConvLayer, Network, NetworkSpec};
use qthermal::sim::dataset::{load_mnist, Split, DEFAULT_THRESHOLD};
use qthermal::sim::BinaryImageDataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

/// `QTHERMAL_MNIST_DIR`, else the bundled subset.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("QTHERMAL_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset"))
}

pub fn mnist(split: Split) -> BinaryImageDataset {
    load_mnist(&mnist_dir(), split, DEFAULT_THRESHOLD).expect("MNIST files")
}

/// A random valid small network: 1–2 conv layers, 0–2 hidden dense layers.
pub fn random_network(rng: &mut ChaCha8Rng) -> Network {
    loop {
        let side = rng.random_range(5..=9);
        let conv = (0..rng.random_range(1..=2))
            .map(|_| {
                ConvLayer::new(
                    rng.random_range(1..=3),
                    rng.random_range(1..=3),
                    rng.random_range(1..=2),
                )
            })
            .collect();
        let dense = (0..rng.random_range(0..=2)).map(|_| rng.random_range(2..=8)).collect();
        let spec = NetworkSpec {
            height: side,
            width: rng.random_range(5..=9),
            conv,
            dense,
            classes: rng.random_range(2..=5),
        };
        if let Ok(net) = Network::new(spec) {
            return net;
        }
    }
}

pub struct CheckSummary {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Gradient check of `coords` random coordinates on one random image, with
/// He weights and small random biases. Coordinates whose ±ε step crosses a
/// ReLU kink are replaced by fresh ones.
pub fn check_random_coordinates(net: &Network, seed: u64, coords: usize) -> CheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = net.init_params(seed);
    for p in params.iter_mut() {
        if *p == 0.0 {
            *p = rng.random_range(-0.1..0.1);
        }
    }
    let image: Vec<f64> = (0..net.inputs()).map(|_| rng.random::<f64>()).collect();
    let label = rng.random_range(0..net.spec().classes);
    let batch = [(image.as_slice(), label)];
    let mut summary = CheckSummary {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut attempts = 0;
    while summary.checked < coords && attempts < 100 * coords {
        attempts += 1;
        let i = rng.random_range(0..net.n_params());
        let r = gradient_check(net, &params, &batch, &[i], 1e-3).unwrap();
        summary.checked += r.checked;
        summary.skipped += r.skipped;
        summary.max_rel_error = summary.max_rel_error.max(r.max_rel_error);
    }
    summary
}
