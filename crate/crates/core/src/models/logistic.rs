use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_labels, Classifier};
use crate::bundle::Bundle;
use crate::nn::{
    cross_entropy, flatten, push_dense, read_dense, select_rows, softmax_rows, unflatten,
    validation_split, Dense, EarlyStopping, EpochRecord,
};
use crate::util::rng;
use crate::{Error, Result};

pub const LOGISTIC_BUNDLE_KIND: &str = "logistic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub val_frac: f64,
    pub patience: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-3,
            epochs: 500,
            lr: 1.0,
            seed: 0,
            val_frac: 0.1,
            patience: 10,
        }
    }
}

/// Multinomial logistic regression. The weight matrix is stored input-major
/// (d × 3), the transpose of the usual 3 × d layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub layer: Dense,
    pub l2: f64,
    pub history: Vec<EpochRecord>,
}

impl LogisticModel {
    pub fn zeros(d: usize, l2: f64) -> Self {
        Self {
            layer: Dense::zeros(d, 3),
            l2,
            history: Vec::new(),
        }
    }

    /// Uniform fan-in initialisation; used for gradient checks.
    pub fn random(d: usize, l2: f64, seed: u64) -> Self {
        Self {
            layer: Dense::init(&mut rng(seed), d, 3),
            l2,
            history: Vec::new(),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        flatten(self.layer.slices())
    }

    pub fn set_params(&mut self, p: &[f64]) {
        unflatten(self.layer.slices_mut(), p);
    }

    /// Mean cross-entropy plus `l2/2 · ‖W‖²` (bias unpenalised).
    pub fn loss(&self, x: ArrayView2<f64>, y: &[usize]) -> f64 {
        let p = softmax_rows(&self.layer.forward(x));
        cross_entropy(&p, y) + 0.5 * self.l2 * self.layer.w.mapv(|w| w * w).sum()
    }

    pub fn loss_and_grad(&self, x: ArrayView2<f64>, y: &[usize]) -> (f64, Vec<f64>) {
        let p = softmax_rows(&self.layer.forward(x));
        let loss = cross_entropy(&p, y) + 0.5 * self.l2 * self.layer.w.mapv(|w| w * w).sum();
        let mut d = p;
        for (i, &c) in y.iter().enumerate() {
            d[[i, c]] -= 1.0;
        }
        d /= y.len().max(1) as f64;
        let (mut gw, gb, _) = self.layer.backward(x, d.view());
        gw.scaled_add(self.l2, &self.layer.w);
        (loss, flatten([gw.as_slice().unwrap(), gb.as_slice().unwrap()]))
    }

    pub fn to_bundle(&self) -> Bundle {
        let mut b = Bundle::new(LOGISTIC_BUNDLE_KIND, json!({ "l2": self.l2, "history": self.history }));
        push_dense(&mut b, "linear", &self.layer);
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        b.expect_kind(LOGISTIC_BUNDLE_KIND)?;
        Ok(Self {
            layer: read_dense(b, "linear")?,
            l2: b.meta["l2"].as_f64().unwrap_or(0.0),
            history: serde_json::from_value(b.meta["history"].clone()).unwrap_or_default(),
        })
    }
}

impl Classifier for LogisticModel {
    fn input_width(&self) -> usize {
        self.layer.fan_in()
    }

    fn predict_proba_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64> {
        softmax_rows(&self.layer.forward(x))
    }
}

/// Full-batch gradient descent from zero weights. Each epoch starts from a
/// step of `lr` and halves it until the training loss does not increase
/// (tolerance 1e-12), so the loss sequence is monotone. Early stopping
/// watches the cross-entropy of a stratified 10% validation slice and
/// restores the best epoch.
pub fn train_logistic(x: ArrayView2<f64>, y: &[usize], cfg: &LogisticConfig) -> Result<LogisticModel> {
    check_labels(x, y)?;
    let (tr, va) = validation_split(y, cfg.val_frac, cfg.seed);
    let xt = select_rows(x, &tr);
    let yt: Vec<usize> = tr.iter().map(|&i| y[i]).collect();
    let xv = select_rows(x, &va);
    let yv: Vec<usize> = va.iter().map(|&i| y[i]).collect();

    let mut model = LogisticModel::zeros(x.ncols(), cfg.l2);
    let mut params = model.params();
    let mut stop = EarlyStopping::new(cfg.patience, params.clone());
    let mut history = Vec::new();
    for epoch in 0..cfg.epochs {
        let (loss, grad) = model.loss_and_grad(xt.view(), &yt);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("logistic loss {loss} at epoch {epoch}")));
        }
        let mut step = cfg.lr;
        let mut accepted = false;
        while step > 1e-20 {
            let trial: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            model.set_params(&trial);
            let l = model.loss(xt.view(), &yt);
            if l.is_finite() && l <= loss + 1e-12 {
                params = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        model.set_params(&params);
        let train_loss = model.loss(xt.view(), &yt);
        let val_loss = if yv.is_empty() {
            train_loss
        } else {
            cross_entropy(&model.predict_proba_unchecked(xv.view()), &yv)
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if !yv.is_empty() && stop.observe(epoch, val_loss, &params) {
            break;
        }
        if !accepted {
            break;
        }
    }
    if !yv.is_empty() {
        model.set_params(&stop.best_params);
    }
    model.history = history;
    Ok(model)
}
