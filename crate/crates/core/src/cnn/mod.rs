//! A small convolutional classifier trained by plain SGD with
//! backpropagation.
//!
//! The network is a stack of valid-padding convolutions, each followed by
//! ReLU, then fully connected ReLU layers and a linear output layer read
//! through softmax. Input is a single-channel `height × width` real tensor;
//! binary images enter as zeros and ones.
//!
//! All parameters live in one flat `Vec<f64>`. Layer by layer, each
//! convolution stores its weights as `[filter][channel][row][col]` followed
//! by one bias per filter, and each dense layer stores `[out][in]` followed
//! by one bias per output. Dense layers see the last convolution output
//! flattened as `[channel][row][col]`.

pub mod checkpoint;
mod net;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use net::{gradient_check, relu, softmax, CnnClassifier, GradientCheck, Network};
pub use train::{evaluate, train, EpochStats, TrainConfig, TrainedNetwork};

use crate::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("empty batch")]
    EmptyBatch,
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, CnnError>;

/// One convolution: `filters` output channels, square `kernel`, `stride`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvLayer {
    pub filters: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl ConvLayer {
    pub fn new(filters: usize, kernel: usize, stride: usize) -> Self {
        Self {
            filters,
            kernel,
            stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub height: usize,
    pub width: usize,
    pub conv: Vec<ConvLayer>,
    /// Hidden dense widths; the output layer of `classes` units is implicit.
    pub dense: Vec<usize>,
    pub classes: usize,
}

impl NetworkSpec {
    /// conv(8, 3×3, stride 1) → conv(16, 3×3, stride 2) → dense(64) → classes.
    pub fn mnist_default(height: usize, width: usize, classes: usize) -> Self {
        Self {
            height,
            width,
            conv: vec![ConvLayer::new(8, 3, 1), ConvLayer::new(16, 3, 2)],
            dense: vec![64],
            classes,
        }
    }

    /// Stable text form; its digest tags checkpoints.
    pub fn canonical(&self) -> String {
        let conv: Vec<String> = self
            .conv
            .iter()
            .map(|c| format!("{}x{}s{}", c.filters, c.kernel, c.stride))
            .collect();
        let dense: Vec<String> = self.dense.iter().map(|d| d.to_string()).collect();
        format!(
            "qthermal-cnn;input={}x{};conv={};dense={};classes={}",
            self.height,
            self.width,
            conv.join(","),
            dense.join(","),
            self.classes
        )
    }

    pub(crate) fn layout(&self) -> Result<Layout> {
        let bad = |msg: String| Err(CnnError::InvalidSpec(msg));
        if self.height == 0 || self.width == 0 {
            return bad("input must be at least 1×1".into());
        }
        if self.classes == 0 {
            return bad("need at least one class".into());
        }
        let (mut c, mut h, mut w) = (1, self.height, self.width);
        let mut offset = 0;
        let mut convs = Vec::with_capacity(self.conv.len());
        for (i, l) in self.conv.iter().enumerate() {
            if l.filters == 0 || l.kernel == 0 || l.stride == 0 {
                return bad(format!("conv layer {i} has a zero dimension"));
            }
            if l.kernel > h || l.kernel > w {
                return bad(format!("conv layer {i}: kernel {} exceeds input {h}×{w}", l.kernel));
            }
            let g = ConvGeom {
                in_c: c,
                in_h: h,
                in_w: w,
                out_c: l.filters,
                k: l.kernel,
                stride: l.stride,
                out_h: (h - l.kernel) / l.stride + 1,
                out_w: (w - l.kernel) / l.stride + 1,
                w_off: offset,
                b_off: offset + l.filters * c * l.kernel * l.kernel,
            };
            offset = g.b_off + l.filters;
            (c, h, w) = (g.out_c, g.out_h, g.out_w);
            convs.push(g);
        }
        let mut n_in = c * h * w;
        let mut denses = Vec::with_capacity(self.dense.len() + 1);
        let widths = self.dense.iter().map(|&d| (d, true)).chain([(self.classes, false)]);
        for (i, (n_out, relu)) in widths.enumerate() {
            if n_out == 0 {
                return bad(format!("dense layer {i} has zero width"));
            }
            let g = DenseGeom {
                n_in,
                n_out,
                relu,
                w_off: offset,
                b_off: offset + n_out * n_in,
            };
            offset = g.b_off + n_out;
            n_in = n_out;
            denses.push(g);
        }
        Ok(Layout {
            inputs: self.height * self.width,
            convs,
            denses,
            n_params: offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub in_c: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_c: usize,
    pub k: usize,
    pub stride: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub w_off: usize,
    pub b_off: usize,
}

impl ConvGeom {
    pub fn fan_in(&self) -> usize {
        self.in_c * self.k * self.k
    }

    pub fn out_len(&self) -> usize {
        self.out_c * self.out_h * self.out_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DenseGeom {
    pub n_in: usize,
    pub n_out: usize,
    pub relu: bool,
    pub w_off: usize,
    pub b_off: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub inputs: usize,
    pub convs: Vec<ConvGeom>,
    pub denses: Vec<DenseGeom>,
    pub n_params: usize,
}
