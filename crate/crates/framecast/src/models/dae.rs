//! Denoising autoencoder trained with cosine-distance loss.
//!
//! Ten affine layers (five encoder, five decoder) with ReLU on all hidden
//! layers and an identity output. A random fraction of input coordinates
//! is dropped during training; kept units are scaled by 1/keep so the
//! inference forward pass needs no rescaling. The optimizer is adaptive
//! moment estimation (beta1 = 0.9, beta2 = 0.999, eps = 1e-8). Everything
//! downstream of the seed is deterministic: shuffling and dropout come
//! from one seeded generator and all reductions run in a fixed order.

use crate::error::{Error, Result};
use crate::representation::{cosine_dense, dot, Instance};
use crate::util::KahanSum;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{StoppingReason, TrainConfig, TrainLog};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One affine layer; `weight` is row-major `[out_dim x in_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Layer {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }
}

/// All layer parameters of the network. Also reused as the container for
/// gradients and optimizer moments, which share the same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeParams {
    pub widths: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// The standard width chain: input, nine hidden layers, output.
pub fn dae_widths(input: usize, hidden: usize, output: usize) -> Vec<usize> {
    let mut widths = Vec::with_capacity(11);
    widths.push(input);
    widths.extend(std::iter::repeat(hidden).take(9));
    widths.push(output);
    widths
}

impl DaeParams {
    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("widths is never empty")
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    fn zeros_like(&self) -> DaeParams {
        DaeParams {
            widths: self.widths.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }

    /// Parameters in coordinate order: each layer's weights, then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weight);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn from_flat(widths: &[usize], flat: &[f64]) -> Result<DaeParams> {
        let mut params = zero_params(widths)?;
        if flat.len() != params.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                params.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for layer in &mut params.layers {
            layer.weight.copy_from_slice(&flat[offset..offset + layer.weight.len()]);
            offset += layer.weight.len();
            layer.bias.copy_from_slice(&flat[offset..offset + layer.bias.len()]);
            offset += layer.bias.len();
        }
        Ok(params)
    }

    fn coord_mut(&mut self, mut idx: usize) -> &mut f64 {
        for layer in &mut self.layers {
            if idx < layer.weight.len() {
                return &mut layer.weight[idx];
            }
            idx -= layer.weight.len();
            if idx < layer.bias.len() {
                return &mut layer.bias[idx];
            }
            idx -= layer.bias.len();
        }
        panic!("parameter index out of range");
    }

    fn coord(&self, mut idx: usize) -> f64 {
        for layer in &self.layers {
            if idx < layer.weight.len() {
                return layer.weight[idx];
            }
            idx -= layer.weight.len();
            if idx < layer.bias.len() {
                return layer.bias[idx];
            }
            idx -= layer.bias.len();
        }
        panic!("parameter index out of range");
    }
}

fn zero_params(widths: &[usize]) -> Result<DaeParams> {
    if widths.len() < 2 {
        return Err(Error::invalid("need at least an input and an output width"));
    }
    if let Some(pos) = widths.iter().position(|&w| w == 0) {
        return Err(Error::invalid(format!("width {pos} is zero")));
    }
    let layers = widths
        .windows(2)
        .map(|pair| Layer::zeros(pair[0], pair[1]))
        .collect();
    Ok(DaeParams {
        widths: widths.to_vec(),
        layers,
    })
}

/// Initialize weights uniformly in +-sqrt(6 / (fan_in + fan_out)), biases
/// zero. Bitwise deterministic for a given seed.
pub fn dae_init(seed: u64, widths: &[usize]) -> Result<DaeParams> {
    let mut params = zero_params(widths)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in &mut params.layers {
        let scale = (6.0 / (layer.in_dim + layer.out_dim) as f64).sqrt();
        for w in &mut layer.weight {
            *w = (rng.gen::<f64>() * 2.0 - 1.0) * scale;
        }
    }
    Ok(params)
}

/// Input dropout mask: which coordinates are kept, and the keep probability
/// used for the inverted 1/keep scaling.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    pub keep: Vec<bool>,
    pub keep_prob: f64,
}

impl DropoutMask {
    pub fn draw(rng: &mut impl Rng, dims: usize, keep_prob: f64) -> Self {
        DropoutMask {
            keep: (0..dims).map(|_| rng.gen::<f64>() < keep_prob).collect(),
            keep_prob,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.keep)
            .map(|(&v, &k)| if k { v / self.keep_prob } else { 0.0 })
            .collect()
    }
}

fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let mut out = layer.bias.clone();
    for (o, out_val) in out.iter_mut().enumerate() {
        *out_val += dot(&layer.weight[o * layer.in_dim..(o + 1) * layer.in_dim], input);
    }
    out
}

struct ForwardTrace {
    /// activations[0] is the (masked) input; activations[l+1] is layer l's output
    activations: Vec<Vec<f64>>,
    /// pre-activations per layer
    pre: Vec<Vec<f64>>,
}

fn forward_trace(params: &DaeParams, x: &[f64], mask: Option<&DropoutMask>) -> ForwardTrace {
    let input = match mask {
        Some(m) => m.apply(x),
        None => x.to_vec(),
    };
    let n_layers = params.layers.len();
    let mut activations = Vec::with_capacity(n_layers + 1);
    let mut pre = Vec::with_capacity(n_layers);
    activations.push(input);
    for (l, layer) in params.layers.iter().enumerate() {
        let z = affine(layer, activations.last().expect("non-empty"));
        let a = if l + 1 < n_layers {
            z.iter().map(|&v| v.max(0.0)).collect()
        } else {
            z.clone()
        };
        pre.push(z);
        activations.push(a);
    }
    ForwardTrace { activations, pre }
}

/// Forward pass: masked input (training) or raw input (inference), affine +
/// ReLU through the hidden layers, identity output.
pub fn dae_forward(params: &DaeParams, x: &[f64], mask: Option<&DropoutMask>) -> Result<Vec<f64>> {
    if x.len() != params.input_dim() {
        return Err(Error::invalid(format!(
            "input width {} does not match network input {}",
            x.len(),
            params.input_dim()
        )));
    }
    if let Some(m) = mask {
        if m.keep.len() != x.len() {
            return Err(Error::invalid("dropout mask width does not match input"));
        }
    }
    Ok(forward_trace(params, x, mask)
        .activations
        .pop()
        .expect("forward always produces an output"))
}

/// Cosine distance, 1 - cos(prediction, target). A zero prediction (or
/// target) scores a full loss of 1.
pub fn dae_loss(prediction: &[f64], target: &[f64]) -> f64 {
    1.0 - cosine_dense(prediction, target)
}

/// d(loss)/d(prediction). Zero at zero-norm predictions or targets, where
/// the cosine convention makes the loss locally flat.
fn loss_gradient(prediction: &[f64], target: &[f64]) -> Vec<f64> {
    let np2 = dot(prediction, prediction);
    let nt2 = dot(target, target);
    if np2 == 0.0 || nt2 == 0.0 {
        return vec![0.0; prediction.len()];
    }
    let np = np2.sqrt();
    let nt = nt2.sqrt();
    let cos = dot(prediction, target) / (np * nt);
    prediction
        .iter()
        .zip(target)
        .map(|(&p, &t)| -(t / (np * nt) - cos * p / np2))
        .collect()
}

/// Backpropagate one example; accumulates into `grads` and returns the loss.
fn backprop_example(
    params: &DaeParams,
    grads: &mut DaeParams,
    x: &[f64],
    target: &[f64],
    mask: Option<&DropoutMask>,
) -> f64 {
    let trace = forward_trace(params, x, mask);
    let prediction = trace.activations.last().expect("non-empty");
    let loss = dae_loss(prediction, target);

    let n_layers = params.layers.len();
    let mut delta = loss_gradient(prediction, target);
    for l in (0..n_layers).rev() {
        let layer = &params.layers[l];
        let grad = &mut grads.layers[l];
        let input = &trace.activations[l];
        for o in 0..layer.out_dim {
            let d = delta[o];
            if d != 0.0 {
                let row = &mut grad.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, &a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            grad.bias[o] += d;
        }
        if l > 0 {
            let mut prev = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let d = delta[o];
                if d != 0.0 {
                    let row = &layer.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
            }
            // ReLU gate of the previous hidden layer
            for (p, &z) in prev.iter_mut().zip(&trace.pre[l - 1]) {
                if z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    loss
}

/// Mean loss and mean gradients over a batch, without dropout.
fn backprop_batch(params: &DaeParams, batch: &[(Vec<f64>, Vec<f64>)]) -> (f64, DaeParams) {
    let mut grads = params.zeros_like();
    let mut loss = KahanSum::new();
    for (x, t) in batch {
        loss.add(backprop_example(params, &mut grads, x, t, None));
    }
    let scale = 1.0 / batch.len() as f64;
    for layer in &mut grads.layers {
        for w in &mut layer.weight {
            *w *= scale;
        }
        for b in &mut layer.bias {
            *b *= scale;
        }
    }
    (loss.value() * scale, grads)
}

fn mean_loss(params: &DaeParams, batch: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let mut loss = KahanSum::new();
    for (x, t) in batch {
        let trace = forward_trace(params, x, None);
        loss.add(dae_loss(trace.activations.last().expect("non-empty"), t));
    }
    loss.value() / batch.len() as f64
}

const MAX_CHECK_COORDS: usize = 4096;

/// Central-finite-difference check of the analytic gradients on a batch.
/// Returns the max over sampled coordinates of
/// |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
pub fn grad_check(params: &DaeParams, batch: &[(Vec<f64>, Vec<f64>)], epsilon: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("gradient check needs at least one example"));
    }
    let (_, analytic) = backprop_batch(params, batch);
    let total = params.param_count();
    let stride = total.div_ceil(MAX_CHECK_COORDS).max(1);
    let mut probe = params.clone();
    let mut max_rel = 0.0f64;
    for idx in (0..total).step_by(stride) {
        let original = probe.coord(idx);
        *probe.coord_mut(idx) = original + epsilon;
        let plus = mean_loss(&probe, batch);
        *probe.coord_mut(idx) = original - epsilon;
        let minus = mean_loss(&probe, batch);
        *probe.coord_mut(idx) = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic.coord(idx);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

struct Adam {
    m: DaeParams,
    v: DaeParams,
    step: u64,
    learning_rate: f64,
}

impl Adam {
    fn new(params: &DaeParams, learning_rate: f64) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            learning_rate,
        }
    }

    fn update(&mut self, params: &mut DaeParams, grads: &DaeParams) {
        self.step += 1;
        let bias1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
        let bias2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
        for l in 0..params.layers.len() {
            let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                    let m_hat = m[i] / bias1;
                    let v_hat = v[i] / bias2;
                    p[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            };
            apply(
                &mut params.layers[l].weight,
                &grads.layers[l].weight,
                &mut self.m.layers[l].weight,
                &mut self.v.layers[l].weight,
            );
            apply(
                &mut params.layers[l].bias,
                &grads.layers[l].bias,
                &mut self.m.layers[l].bias,
                &mut self.v.layers[l].bias,
            );
        }
    }
}

/// Train with minibatch gradient descent on mean cosine distance, early
/// stopping on validation mean cosine (strict improvement, patience in
/// epochs), keeping the best-validation parameters.
pub fn dae_train(
    train: &[Instance],
    valid: &[Instance],
    config: &TrainConfig,
) -> Result<(DaeParams, TrainLog)> {
    config.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(Error::invalid("training and validation sets must be non-empty"));
    }
    let input_dim = train[0].flattened_context().len();
    let output_dim = train[0].target.dims();

    let mut skipped_zero_targets = 0usize;
    let mut train_pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(train.len());
    for instance in train {
        let x = instance.flattened_context();
        if x.len() != input_dim || instance.target.dims() != output_dim {
            return Err(Error::invalid("training instances have mixed dimensions"));
        }
        if instance.target.is_zero() {
            skipped_zero_targets += 1;
            continue;
        }
        train_pairs.push((x, instance.target.weights.clone()));
    }
    if train_pairs.is_empty() {
        return Err(Error::invalid("every training target is a zero vector"));
    }
    let valid_pairs: Vec<(Vec<f64>, Vec<f64>)> = valid
        .iter()
        .map(|instance| {
            let x = instance.flattened_context();
            if x.len() != input_dim || instance.target.dims() != output_dim {
                return Err(Error::invalid("validation instances have mixed dimensions"));
            }
            Ok((x, instance.target.weights.clone()))
        })
        .collect::<Result<_>>()?;

    let widths = dae_widths(input_dim, config.hidden_width, output_dim);
    let mut params = dae_init(config.seed, &widths)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Adam::new(&params, config.learning_rate);
    let keep_prob = 1.0 - config.input_dropout;

    let mut log = Vec::new();
    let mut best_cosine = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = params.clone();
    let mut wait = 0usize;
    let mut stopping = StoppingReason::MaxEpochs;

    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = KahanSum::new();
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = params.zeros_like();
            let mut batch_loss = KahanSum::new();
            for &i in batch {
                let (x, t) = &train_pairs[i];
                let mask = if config.input_dropout > 0.0 {
                    Some(DropoutMask::draw(&mut rng, input_dim, keep_prob))
                } else {
                    None
                };
                let loss = backprop_example(&params, &mut grads, x, t, mask.as_ref());
                batch_loss.add(loss);
            }
            let batch_mean = batch_loss.value() / batch.len() as f64;
            if !batch_mean.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            let scale = 1.0 / batch.len() as f64;
            for layer in &mut grads.layers {
                for w in &mut layer.weight {
                    *w *= scale;
                }
                for b in &mut layer.bias {
                    *b *= scale;
                }
            }
            optimizer.update(&mut params, &grads);
            epoch_loss.add(batch_loss.value());
        }
        let train_loss = epoch_loss.value() / train_pairs.len() as f64;

        let mut valid_sum = KahanSum::new();
        for (x, t) in &valid_pairs {
            let trace = forward_trace(&params, x, None);
            valid_sum.add(cosine_dense(trace.activations.last().expect("non-empty"), t));
        }
        let valid_cosine = valid_sum.value() / valid_pairs.len() as f64;
        log.push(super::EpochRecord {
            epoch,
            train_loss,
            valid_cosine,
        });

        if valid_cosine > best_cosine {
            best_cosine = valid_cosine;
            best_epoch = epoch;
            best_params = params.clone();
            wait = 0;
        } else {
            wait += 1;
            if wait >= config.patience_epochs.max(1) {
                stopping = StoppingReason::EarlyStopped;
                break;
            }
        }
    }

    Ok((
        best_params,
        TrainLog {
            epochs: log,
            best_epoch,
            stopping,
            skipped_zero_targets,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::FrameVector;

    fn unit(weights: &[f64]) -> FrameVector {
        let mut v = FrameVector {
            weights: weights.to_vec(),
            normalized: false,
        };
        v.normalize();
        v
    }

    fn instance(doc: &str, anchor: usize, context: &[f64], target: &[f64]) -> Instance {
        Instance {
            doc_id: doc.into(),
            anchor_index: anchor,
            context: vec![unit(context)],
            target: unit(target),
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let widths = dae_widths(16, 32, 16);
        let a = dae_init(9, &widths).unwrap();
        let b = dae_init(9, &widths).unwrap();
        assert_eq!(a, b);
        let c = dae_init(10, &widths).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_width_chain_shape() {
        let widths = dae_widths(1221, 512, 1221);
        assert_eq!(widths.len(), 11);
        let params = dae_init(0, &widths).unwrap();
        assert_eq!(params.layers.len(), 10);
        assert_eq!(params.layers[0].in_dim, 1221);
        assert_eq!(params.layers[9].out_dim, 1221);
        assert!(params.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn zero_width_rejected() {
        assert!(dae_init(0, &[4, 0, 4]).is_err());
        assert!(dae_init(0, &[4]).is_err());
    }

    #[test]
    fn zero_input_zero_biases_zero_output() {
        let params = dae_init(1, &[3, 4, 3]).unwrap();
        let out = dae_forward(&params, &[0.0, 0.0, 0.0], None).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inference_is_repeatable() {
        let params = dae_init(2, &[3, 5, 3]).unwrap();
        let x = [0.3, -0.1, 0.7];
        assert_eq!(
            dae_forward(&params, &x, None).unwrap(),
            dae_forward(&params, &x, None).unwrap()
        );
    }

    #[test]
    fn keep_all_mask_is_scaled_inference() {
        // 2-2-2 toy: a keep-all mask equals inference on the 1/keep-scaled input
        let params = dae_init(3, &[2, 2, 2]).unwrap();
        let x = [0.4, 0.9];
        let mask = DropoutMask {
            keep: vec![true, true],
            keep_prob: 0.7,
        };
        let masked = dae_forward(&params, &x, Some(&mask)).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v / 0.7).collect();
        let inference = dae_forward(&params, &scaled, None).unwrap();
        for (a, b) in masked.iter().zip(&inference) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_width_mismatch_errors() {
        let params = dae_init(0, &[3, 4, 3]).unwrap();
        assert!(dae_forward(&params, &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn loss_hand_values() {
        assert_eq!(dae_loss(&[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0]), 0.0);
        assert_eq!(dae_loss(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert!((dae_loss(&[1.0, 2.0, 0.0], &[2.0, 1.0, 0.0]) - 0.2).abs() < 1e-12);
        assert_eq!(dae_loss(&[0.0, 0.0], &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn grad_check_linear_network() {
        // widths [2, 2] is a single affine layer: purely linear
        let params = dae_init(7, &[2, 2]).unwrap();
        let batch = vec![(vec![0.8, -0.4], vec![0.6, 0.3])];
        let err = grad_check(&params, &batch, 1e-4).unwrap();
        assert!(err <= 1e-5, "relative error {err}");
    }

    #[test]
    fn grad_check_relu_network_nudged() {
        // biases pushed away from zero so no pre-activation sits on the kink
        let mut params = dae_init(11, &[3, 6, 6, 3]).unwrap();
        for layer in &mut params.layers {
            for b in &mut layer.bias {
                *b = 0.35;
            }
        }
        let batch = vec![
            (vec![0.9, 0.2, -0.5], vec![0.3, 0.9, 0.1]),
            (vec![-0.3, 0.8, 0.6], vec![0.7, 0.2, 0.4]),
        ];
        let err = grad_check(&params, &batch, 1e-4).unwrap();
        assert!(err <= 1e-4, "relative error {err}");
    }

    #[test]
    fn stationary_point_has_vanishing_gradients() {
        // identity network, prediction parallel to target: both analytic and
        // numeric gradients are ~0
        let mut params = zero_params(&[2, 2]).unwrap();
        params.layers[0].weight = vec![1.0, 0.0, 0.0, 1.0];
        let batch = vec![(vec![0.6, 0.8], vec![0.6, 0.8])];
        let (_, analytic) = backprop_batch(&params, &batch);
        for idx in 0..params.param_count() {
            assert!(analytic.coord(idx).abs() <= 1e-6);
            let mut probe = params.clone();
            let eps = 1e-4;
            *probe.coord_mut(idx) += eps;
            let plus = mean_loss(&probe, &batch);
            *probe.coord_mut(idx) -= 2.0 * eps;
            let minus = mean_loss(&probe, &batch);
            let numeric = (plus - minus) / (2.0 * eps);
            assert!(numeric.abs() <= 1e-6);
        }
    }

    fn toy_task(seed: u64, n: usize) -> Vec<Instance> {
        // target support is the context support rotated by one coordinate
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let mut ctx = vec![0.0; 8];
                let mut tgt = vec![0.0; 8];
                for _ in 0..3 {
                    let j = rng.gen_range(0..8usize);
                    ctx[j] += 1.0;
                    tgt[(j + 1) % 8] += 1.0;
                }
                instance("d", i, &ctx, &tgt)
            })
            .collect()
    }

    #[test]
    fn training_is_seed_deterministic() {
        let train = toy_task(1, 12);
        let valid = toy_task(2, 4);
        let config = TrainConfig {
            learning_rate: 1e-3,
            batch_size: 4,
            input_dropout: 0.3,
            patience_epochs: 3,
            max_epochs: 5,
            hidden_width: 8,
            seed: 42,
        };
        let (params_a, log_a) = dae_train(&train, &valid, &config).unwrap();
        let (params_b, log_b) = dae_train(&train, &valid, &config).unwrap();
        assert_eq!(log_a, log_b);
        assert_eq!(params_a, params_b);
    }

    #[test]
    fn patience_zero_stops_after_first_non_improving_epoch() {
        let train = toy_task(3, 8);
        let valid = toy_task(4, 4);
        // zero-ish learning rate: validation cosine is identical every epoch,
        // so epoch 2 is the first non-improving one
        let config = TrainConfig {
            learning_rate: 1e-300,
            batch_size: 8,
            input_dropout: 0.0,
            patience_epochs: 0,
            max_epochs: 50,
            hidden_width: 8,
            seed: 1,
        };
        let (_, log) = dae_train(&train, &valid, &config).unwrap();
        assert_eq!(log.epochs.len(), 2);
        assert_eq!(log.best_epoch, 1);
        assert_eq!(log.stopping, StoppingReason::EarlyStopped);
    }

    #[test]
    fn best_epoch_achieves_max_validation_cosine() {
        let train = toy_task(5, 16);
        let valid = toy_task(6, 6);
        let config = TrainConfig {
            learning_rate: 3e-3,
            batch_size: 8,
            input_dropout: 0.1,
            patience_epochs: 10,
            max_epochs: 40,
            hidden_width: 8,
            seed: 7,
        };
        let (_, log) = dae_train(&train, &valid, &config).unwrap();
        let best = log
            .epochs
            .iter()
            .map(|e| e.valid_cosine)
            .fold(f64::NEG_INFINITY, f64::max);
        let recorded = log
            .epochs
            .iter()
            .find(|e| e.epoch == log.best_epoch)
            .unwrap()
            .valid_cosine;
        assert_eq!(recorded, best);
    }

    #[test]
    fn zero_targets_are_skipped_and_counted() {
        let mut train = toy_task(8, 6);
        train.push(Instance {
            doc_id: "z".into(),
            anchor_index: 0,
            context: vec![unit(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])],
            target: FrameVector::zeros(8),
        });
        let valid = toy_task(9, 3);
        let config = TrainConfig {
            learning_rate: 1e-3,
            batch_size: 4,
            input_dropout: 0.0,
            patience_epochs: 1,
            max_epochs: 2,
            hidden_width: 8,
            seed: 0,
        };
        let (_, log) = dae_train(&train, &valid, &config).unwrap();
        assert_eq!(log.skipped_zero_targets, 1);
    }

    #[test]
    fn non_finite_loss_aborts_with_location() {
        let train = toy_task(10, 8);
        let valid = toy_task(11, 3);
        let config = TrainConfig {
            learning_rate: 1e308,
            batch_size: 4,
            input_dropout: 0.0,
            patience_epochs: 5,
            max_epochs: 50,
            hidden_width: 8,
            seed: 2,
        };
        let err = dae_train(&train, &valid, &config).unwrap_err();
        match err {
            Error::NonFiniteLoss { epoch, .. } => assert!(epoch >= 1),
            other => panic!("expected NonFiniteLoss, got {other:?}"),
        }
    }
}
