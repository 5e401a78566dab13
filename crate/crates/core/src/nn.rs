//! Dense layers, activations, Adam and early stopping shared by the
//! baselines and the fusion model.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::sub_rng;

/// Affine map `y = x·W + b` with `W` stored input-major (in × out).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    /// Uniform(±1/√fan_in) weights and biases.
    pub fn init(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        Self {
            w: Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..=bound)),
            b: Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bound..=bound)),
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Gradients of the weights and bias, and of the input.
    pub fn backward(&self, x: ArrayView2<f64>, dy: ArrayView2<f64>) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        (x.t().dot(&dy), dy.sum_axis(Axis(0)), dy.dot(&self.w.t()))
    }

    pub fn slices(&self) -> [&[f64]; 2] {
        [self.w.as_slice().unwrap(), self.b.as_slice().unwrap()]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 2] {
        [self.w.as_slice_mut().unwrap(), self.b.as_slice_mut().unwrap()]
    }
}

/// Stores a layer as `{prefix}.w` and `{prefix}.b`.
pub fn push_dense(bundle: &mut crate::bundle::Bundle, prefix: &str, layer: &Dense) {
    bundle.push(format!("{prefix}.w"), &[layer.fan_in(), layer.fan_out()], layer.w.as_slice().unwrap());
    bundle.push(format!("{prefix}.b"), &[layer.fan_out()], layer.b.as_slice().unwrap());
}

pub fn read_dense(bundle: &crate::bundle::Bundle, prefix: &str) -> crate::Result<Dense> {
    let (shape, w) = bundle.tensor(&format!("{prefix}.w"))?;
    let (_, b) = bundle.tensor(&format!("{prefix}.b"))?;
    let w = Array2::from_shape_vec((shape[0], shape[1]), w)
        .map_err(|e| crate::Error::BadBundle(e.to_string()))?;
    Ok(Dense { w, b: Array1::from(b) })
}

pub fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Zeroes `dy` wherever the pre-activation was not positive.
pub fn relu_backward(pre: &Array2<f64>, mut dy: Array2<f64>) -> Array2<f64> {
    dy.zip_mut_with(pre, |d, p| {
        if *p <= 0.0 {
            *d = 0.0;
        }
    });
    dy
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Row-wise stable softmax.
pub fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut p = z.clone();
    for mut row in p.rows_mut() {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

/// Inverted-dropout mask: kept units are scaled by 1/(1-rate).
pub fn dropout_mask(rng: &mut ChaCha8Rng, shape: (usize, usize), rate: f64) -> Array2<f64> {
    let keep = 1.0 - rate;
    Array2::from_shape_simple_fn(shape, || if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
}

/// Mean cross-entropy of row distributions against labels.
pub fn cross_entropy(p: &Array2<f64>, y: &[usize]) -> f64 {
    let n = y.len().max(1) as f64;
    y.iter()
        .enumerate()
        .map(|(i, &c)| -p[[i, c]].max(1e-300).ln())
        .sum::<f64>()
        / n
}

pub fn flatten<'a>(slices: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    slices.into_iter().flat_map(|s| s.iter().copied()).collect()
}

pub fn unflatten<'a>(slices: impl IntoIterator<Item = &'a mut [f64]>, flat: &[f64]) {
    let mut at = 0;
    for s in slices {
        s.copy_from_slice(&flat[at..at + s.len()]);
        at += s.len();
    }
    debug_assert_eq!(at, flat.len());
}

/// Adaptive moment estimation over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Keeps the parameters of the best validation epoch and signals a stop
/// after `patience` epochs without improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best_loss: f64,
    pub best_epoch: usize,
    pub best_params: Vec<f64>,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, params: Vec<f64>) -> Self {
        Self {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            best_params: params,
            wait: 0,
        }
    }

    /// Returns true when training should stop.
    pub fn observe(&mut self, epoch: usize, val_loss: f64, params: &[f64]) -> bool {
        if val_loss < self.best_loss {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
            self.best_params.copy_from_slice(params);
            self.wait = 0;
            false
        } else {
            self.wait += 1;
            self.wait >= self.patience
        }
    }
}

/// Stratified seeded holdout of `frac` of the rows per class, for early
/// stopping. Classes with fewer than 2 rows stay entirely in training.
pub fn validation_split(y: &[usize], frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..3 {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut sub_rng(seed, 0x7A1, class as u64));
        let n_val = if idx.len() < 2 { 0 } else { (idx.len() as f64 * frac).round() as usize };
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

pub fn select_rows(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    x.select(Axis(0), idx)
}

/// |a - n| / max(|a|, |n|, floor), maximised over entries. The floor keeps
/// entries whose true gradient is zero from dividing round-off by zero.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Central finite differences of `f` at `params`.
pub fn numeric_gradient(params: &[f64], eps: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + eps;
            let up = f(&p);
            p[i] = orig - eps;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Stack of dense layers with ReLU (and optional dropout) between them.
/// The last layer emits logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a training forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input of every layer.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    pub logits: Array2<f64>,
}

impl Mlp {
    /// Widths `[input, hidden.., output]`.
    pub fn init(rng: &mut ChaCha8Rng, widths: &[usize]) -> Self {
        Self {
            layers: widths.windows(2).map(|w| Dense::init(rng, w[0], w[1])).collect(),
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            h = layer.forward(relu(&h).view());
        }
        h
    }

    /// Forward pass that records what backprop needs. With `dropout`, each
    /// hidden activation is multiplied by an inverted-dropout mask.
    pub fn forward_train(&self, x: ArrayView2<f64>, mut dropout: Option<(&mut ChaCha8Rng, f64)>) -> MlpCache {
        let mut inputs = vec![x.to_owned()];
        let mut pre = Vec::new();
        let mut masks = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(inputs[l].view());
            if l == last {
                return MlpCache {
                    inputs,
                    pre,
                    masks,
                    logits: z,
                };
            }
            let mut a = relu(&z);
            let mask = dropout.as_mut().filter(|(_, r)| *r > 0.0).map(|(rng, r)| dropout_mask(rng, a.dim(), *r));
            if let Some(m) = &mask {
                a *= m;
            }
            pre.push(z);
            masks.push(mask);
            inputs.push(a);
        }
        unreachable!("an Mlp has at least one layer")
    }

    /// Flat parameter gradient (layer order, W then b) and input gradient.
    pub fn backward(&self, cache: &MlpCache, dlogits: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(self.layers.len());
        let mut d = dlogits;
        for l in (0..self.layers.len()).rev() {
            if l < self.layers.len() - 1 {
                if let Some(m) = &cache.masks[l] {
                    d *= m;
                }
                d = relu_backward(&cache.pre[l], d);
            }
            let (gw, gb, dx) = self.layers[l].backward(cache.inputs[l].view(), d.view());
            grads.push((gw, gb));
            d = dx;
        }
        grads.reverse();
        let flat = grads
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect();
        (flat, d)
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.slices()).collect()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|l| l.slices_mut()).collect()
    }

    pub fn n_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }
}
