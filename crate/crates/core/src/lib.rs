//! Error-probability bounds for thermal-image discrimination and
//! simulations of quantum-enhanced pattern recognition.
//!
//! A thermal image is an `m`-pixel pattern of Gaussian phase-insensitive
//! channels, each either a background or a target environment sharing the
//! same transmissivity. The crate is layered bottom-up:
//!
//! - [`gaussian`]: zero-mean Gaussian states, symplectic spectra and the
//!   multimode Bures fidelity, plus a Fock-basis oracle for thermal states.
//! - [`channel`]: channel parameterisations, Choi and vacuum-probe output
//!   states, their fidelities and the photon-number/temperature map.
//! - [`bounds`]: Hamming-distance functionals over uniform and
//!   channel-position-finding image spaces, the resulting error bounds and
//!   quantum-advantage metrics.
//! - [`sim`]: IDX ingestion, binarisation, channel-induced pixel noise,
//!   nearest-neighbour classification and Monte Carlo error estimation.
//! - [`cnn`]: a small convolutional classifier trained by plain SGD.
//!
//! Every numerical routine is a pure function of its inputs. Monte Carlo
//! work is spread across threads through [`exec::Execution`], and results
//! do not depend on the thread count.

// `!(x >= lo)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod cnn;
pub mod exec;
pub mod gaussian;
pub mod sim;

pub use bounds::{BoundReport, ImageSpaceSpec, SpaceVariant};
pub use channel::{ChannelKind, ChannelSpec, EnvironmentPair};
pub use exec::Execution;
pub use gaussian::CovarianceMatrix;
