use super::{CnnError, ConvGeom, DenseGeom, Layout, NetworkSpec, Result};
use crate::exec::Execution;
use crate::sim::noise::{stream_rng, StreamPurpose};
use crate::sim::Classifier;
use rand::Rng;

/// Batch items per gradient partial sum. Partials are computed
/// independently and added in chunk order, so the summed gradient does not
/// depend on the thread count.
const CHUNK: usize = 8;

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn ln_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Lowest index among the maxima.
fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// A validated [`NetworkSpec`] with its parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layout: Layout,
}

impl Network {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        let layout = spec.layout()?;
        Ok(Self { spec, layout })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn n_params(&self) -> usize {
        self.layout.n_params
    }

    /// Input length `height · width`.
    pub fn inputs(&self) -> usize {
        self.layout.inputs
    }

    /// He-uniform weights `U(±√(6/fan_in))`, zero biases.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, StreamPurpose::Initialisation, 0, 0);
        let mut p = vec![0.0; self.n_params()];
        for g in &self.layout.convs {
            let bound = (6.0 / g.fan_in() as f64).sqrt();
            for w in &mut p[g.w_off..g.b_off] {
                *w = rng.random_range(-bound..bound);
            }
        }
        for g in &self.layout.denses {
            let bound = (6.0 / g.n_in as f64).sqrt();
            for w in &mut p[g.w_off..g.b_off] {
                *w = rng.random_range(-bound..bound);
            }
        }
        p
    }

    fn check(&self, params: &[f64], image: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(CnnError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        if image.len() != self.inputs() {
            return Err(CnnError::ShapeMismatch(format!(
                "expected {}×{} input, got {} values",
                self.spec.height,
                self.spec.width,
                image.len()
            )));
        }
        Ok(())
    }

    /// Class probabilities.
    pub fn forward(&self, params: &[f64], image: &[f64]) -> Result<Vec<f64>> {
        self.check(params, image)?;
        Ok(softmax(self.activations(params, image).last().unwrap()))
    }

    /// Most probable class, lowest index on ties.
    pub fn predict(&self, params: &[f64], image: &[f64]) -> Result<usize> {
        self.check(params, image)?;
        Ok(argmax(self.activations(params, image).last().unwrap()))
    }

    /// Every layer output: the input, each convolution after ReLU, each
    /// hidden dense layer after ReLU, then the logits.
    fn activations(&self, p: &[f64], image: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(1 + self.layout.convs.len() + self.layout.denses.len());
        acts.push(image.to_vec());
        for g in &self.layout.convs {
            let mut out = vec![0.0; g.out_len()];
            conv_forward(g, p, acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        for g in &self.layout.denses {
            let mut out = vec![0.0; g.n_out];
            dense_forward(g, p, acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        acts
    }

    /// Adds the gradient of `−ln softmax(x)[label]` to `grad` and returns
    /// `(loss, predicted class)`.
    fn backprop(&self, p: &[f64], image: &[f64], label: usize, grad: &mut [f64]) -> (f64, usize) {
        let acts = self.activations(p, image);
        let nconv = self.layout.convs.len();
        let logits = acts.last().unwrap();
        let loss = ln_sum_exp(logits) - logits[label];
        let predicted = argmax(logits);
        let mut delta = softmax(logits);
        delta[label] -= 1.0;
        for (j, g) in self.layout.denses.iter().enumerate().rev() {
            let input = &acts[nconv + j];
            let propagate = nconv + j > 0;
            delta = dense_backward(g, p, input, &delta, grad, propagate);
        }
        for (l, g) in self.layout.convs.iter().enumerate().rev() {
            delta = conv_backward(g, p, &acts[l], &delta, grad, l > 0);
        }
        (loss, predicted)
    }

    /// Summed cross-entropy and its gradient over `batch` of
    /// `(image, label)` items.
    pub fn loss_and_grad(&self, params: &[f64], batch: &[(&[f64], usize)], exec: Execution) -> Result<(f64, Vec<f64>)> {
        let (loss, grad, _) = self.batch_pass(params, batch, exec)?;
        Ok((loss, grad))
    }

    /// Loss, gradient and number of correctly predicted items.
    pub(crate) fn batch_pass(
        &self,
        params: &[f64],
        batch: &[(&[f64], usize)],
        exec: Execution,
    ) -> Result<(f64, Vec<f64>, usize)> {
        if batch.is_empty() {
            return Err(CnnError::EmptyBatch);
        }
        for &(image, label) in batch {
            self.check(params, image)?;
            if label >= self.spec.classes {
                return Err(CnnError::ShapeMismatch(format!(
                    "label {label} with {} classes",
                    self.spec.classes
                )));
            }
        }
        let n = self.n_params();
        let partials = exec.map(batch.len().div_ceil(CHUNK), |c| {
            let mut acc = vec![0.0; n];
            let mut item = vec![0.0; n];
            let (mut loss, mut correct) = (0.0, 0);
            for &(image, label) in &batch[c * CHUNK..((c + 1) * CHUNK).min(batch.len())] {
                item.fill(0.0);
                let (l, pred) = self.backprop(params, image, label, &mut item);
                loss += l;
                correct += (pred == label) as usize;
                for (a, g) in acc.iter_mut().zip(&item) {
                    *a += g;
                }
            }
            (loss, acc, correct)
        });
        let mut parts = partials.into_iter();
        let (mut loss, mut grad, mut correct) = parts.next().unwrap();
        for (l, g, c) in parts {
            loss += l;
            correct += c;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        if !loss.is_finite() {
            return Err(CnnError::NonFiniteLoss);
        }
        Ok((loss, grad, correct))
    }

    fn batch_loss(&self, params: &[f64], batch: &[(&[f64], usize)]) -> f64 {
        batch
            .iter()
            .map(|&(image, label)| {
                let acts = self.activations(params, image);
                let logits = acts.last().unwrap();
                ln_sum_exp(logits) - logits[label]
            })
            .sum()
    }

    /// On/off state of every ReLU unit over the batch.
    fn relu_pattern(&self, params: &[f64], batch: &[(&[f64], usize)]) -> Vec<bool> {
        batch
            .iter()
            .flat_map(|&(image, _)| {
                let acts = self.activations(params, image);
                let hidden = acts.len() - 1;
                acts.into_iter()
                    .take(hidden)
                    .skip(1)
                    .flatten()
                    .map(|a| a > 0.0)
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

fn conv_forward(g: &ConvGeom, p: &[f64], input: &[f64], out: &mut [f64]) {
    let k = g.k;
    for f in 0..g.out_c {
        let bias = p[g.b_off + f];
        for y in 0..g.out_h {
            for x in 0..g.out_w {
                let mut s = bias;
                for c in 0..g.in_c {
                    let w = &p[g.w_off + (f * g.in_c + c) * k * k..][..k * k];
                    let plane = &input[c * g.in_h * g.in_w..];
                    for ki in 0..k {
                        let row = &plane[(y * g.stride + ki) * g.in_w + x * g.stride..][..k];
                        s += w[ki * k..(ki + 1) * k].iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                out[(f * g.out_h + y) * g.out_w + x] = relu(s);
            }
        }
    }
}

/// `delta` is the loss gradient with respect to this layer's
/// pre-activations. Returns the gradient with respect to the previous
/// layer's pre-activations when `propagate` is set.
fn conv_backward(g: &ConvGeom, p: &[f64], input: &[f64], delta: &[f64], grad: &mut [f64], propagate: bool) -> Vec<f64> {
    let k = g.k;
    let mut d_in = if propagate { vec![0.0; input.len()] } else { Vec::new() };
    for f in 0..g.out_c {
        for c in 0..g.in_c {
            let w_base = g.w_off + (f * g.in_c + c) * k * k;
            let plane = c * g.in_h * g.in_w;
            for y in 0..g.out_h {
                for x in 0..g.out_w {
                    let d = delta[(f * g.out_h + y) * g.out_w + x];
                    if d == 0.0 {
                        continue;
                    }
                    for ki in 0..k {
                        let row = plane + (y * g.stride + ki) * g.in_w + x * g.stride;
                        for kj in 0..k {
                            grad[w_base + ki * k + kj] += d * input[row + kj];
                            if propagate {
                                d_in[row + kj] += d * p[w_base + ki * k + kj];
                            }
                        }
                    }
                }
            }
        }
        let plane = &delta[f * g.out_h * g.out_w..(f + 1) * g.out_h * g.out_w];
        grad[g.b_off + f] += plane.iter().sum::<f64>();
    }
    mask_relu(&mut d_in, input);
    d_in
}

fn dense_forward(g: &DenseGeom, p: &[f64], input: &[f64], out: &mut [f64]) {
    for (o, z) in out.iter_mut().enumerate() {
        let w = &p[g.w_off + o * g.n_in..][..g.n_in];
        let s = p[g.b_off + o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
        *z = if g.relu { relu(s) } else { s };
    }
}

fn dense_backward(
    g: &DenseGeom,
    p: &[f64],
    input: &[f64],
    delta: &[f64],
    grad: &mut [f64],
    propagate: bool,
) -> Vec<f64> {
    let mut d_in = if propagate { vec![0.0; g.n_in] } else { Vec::new() };
    for (o, &d) in delta.iter().enumerate() {
        grad[g.b_off + o] += d;
        if d == 0.0 {
            continue;
        }
        let row = g.w_off + o * g.n_in;
        for (gw, x) in grad[row..row + g.n_in].iter_mut().zip(input) {
            *gw += d * x;
        }
        if propagate {
            for (di, w) in d_in.iter_mut().zip(&p[row..row + g.n_in]) {
                *di += d * w;
            }
        }
    }
    mask_relu(&mut d_in, input);
    d_in
}

/// Every propagated input is a ReLU output; its derivative is 1 where the
/// unit is on and 0 elsewhere (including exactly at zero).
fn mask_relu(d_in: &mut [f64], activations: &[f64]) {
    for (d, &a) in d_in.iter_mut().zip(activations) {
        if a <= 0.0 {
            *d = 0.0;
        }
    }
}

/// Trained network plus parameters, usable wherever a [`Classifier`] is.
#[derive(Debug, Clone)]
pub struct CnnClassifier {
    network: Network,
    params: Vec<f64>,
}

impl CnnClassifier {
    pub fn new(network: Network, params: Vec<f64>) -> Result<Self> {
        if params.len() != network.n_params() {
            return Err(CnnError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                network.n_params(),
                params.len()
            )));
        }
        Ok(Self { network, params })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }
}

/// Expands a packed binary image into zeros and ones.
pub(crate) fn unpack_real(bits: &[u64], m: usize) -> Vec<f64> {
    (0..m).map(|i| ((bits[i / 64] >> (i % 64)) & 1) as f64).collect()
}

impl Classifier for CnnClassifier {
    fn classify(&self, image: &[u64]) -> usize {
        let x = unpack_real(image, self.network.inputs());
        argmax(self.network.activations(&self.params, &x).last().unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Largest `|g − ĝ| / max(|g|, |ĝ|)` over checked coordinates.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose `±ε` perturbation switched a ReLU unit; central
    /// differences are meaningless across a kink.
    pub skipped: usize,
}

/// Compares backpropagated gradients with central differences of step
/// `eps` at the given parameter coordinates.
pub fn gradient_check(
    network: &Network,
    params: &[f64],
    batch: &[(&[f64], usize)],
    coords: &[usize],
    eps: f64,
) -> Result<GradientCheck> {
    let (_, grad) = network.loss_and_grad(params, batch, Execution::Sequential)?;
    let pattern = network.relu_pattern(params, batch);
    let mut report = GradientCheck {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut shifted = params.to_vec();
    for &i in coords {
        if i >= params.len() {
            return Err(CnnError::ShapeMismatch(format!("coordinate {i} out of range")));
        }
        shifted[i] = params[i] + eps;
        let plus_pattern = network.relu_pattern(&shifted, batch);
        let plus = network.batch_loss(&shifted, batch);
        shifted[i] = params[i] - eps;
        let minus_pattern = network.relu_pattern(&shifted, batch);
        let minus = network.batch_loss(&shifted, batch);
        shifted[i] = params[i];
        if plus_pattern != pattern || minus_pattern != pattern {
            report.skipped += 1;
            continue;
        }
        let fd = (plus - minus) / (2.0 * eps);
        let scale = grad[i].abs().max(fd.abs());
        let rel = if scale == 0.0 {
            0.0
        } else {
            (grad[i] - fd).abs() / scale
        };
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    Ok(report)
}
