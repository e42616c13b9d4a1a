//! Symmetric pixel-flip noise and the random streams that drive it.
//!
//! Every noisy sample owns a ChaCha8 stream selected by
//! `(master seed, purpose, trial, image)`, so samples do not depend on the
//! order in which threads reach them. A pixel is flipped when its uniform
//! draw falls below `p`; the same stream therefore yields nested flip sets
//! for increasing `p`.

use super::{Result, SimError};
use crate::bounds::pixel_error_bounds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Distinguishes independent uses of the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamPurpose {
    Evaluation = 1,
    Training = 2,
    Initialisation = 3,
    Shuffle = 4,
    Holdout = 5,
}

/// Random stream for one `(trial, item)` cell.
pub fn stream_rng(seed: u64, purpose: StreamPurpose, trial: u32, item: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((purpose as u64) << 56) | (((trial as u64) & 0x00ff_ffff) << 32) | item as u64;
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseDerivation {
    ClassicalLower,
    ClassicalUpper,
    QuantumLower,
    QuantumUpper,
    /// Set directly rather than from a fidelity.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    p: f64,
    pub derivation: NoiseDerivation,
    /// `(F, M)` the probability was derived from.
    pub source: Option<(f64, u64)>,
}

impl NoiseModel {
    pub fn flip(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(SimError::InvalidNoise(p));
        }
        Ok(Self {
            p,
            derivation: NoiseDerivation::Fixed,
            source: None,
        })
    }

    /// The lower or upper single-pixel error bound for fidelity `f` and
    /// `copies` probes.
    pub fn from_bounds(f: f64, copies: u64, derivation: NoiseDerivation) -> Result<Self> {
        let (lower, upper) = pixel_error_bounds(f, copies)?;
        let p = match derivation {
            NoiseDerivation::ClassicalLower | NoiseDerivation::QuantumLower => lower,
            NoiseDerivation::ClassicalUpper | NoiseDerivation::QuantumUpper => upper,
            NoiseDerivation::Fixed => return Err(SimError::Invalid("fixed noise has no bound to derive from".into())),
        };
        Ok(Self {
            p,
            derivation,
            source: Some((f, copies)),
        })
    }

    /// Relabels the provenance of the probability.
    pub fn derived_as(self, derivation: NoiseDerivation) -> Self {
        Self { derivation, ..self }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Writes `image` with every one of its `m` pixels flipped independently
/// with probability `p` into `out`.
pub fn sample_noisy<R: Rng>(image: &[u64], m: usize, p: f64, rng: &mut R, out: &mut [u64]) {
    out.copy_from_slice(image);
    if p <= 0.0 {
        return;
    }
    for i in 0..m {
        let u: f64 = rng.random();
        if u < p {
            out[i / 64] ^= 1 << (i % 64);
        }
    }
}
