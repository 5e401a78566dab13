use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_labels, Classifier};
use crate::bundle::Bundle;
use crate::nn::{
    cross_entropy, flatten, push_dense, read_dense, select_rows, softmax_rows, unflatten,
    validation_split, Adam, EarlyStopping, EpochRecord, Mlp,
};
use crate::util::{rng, sub_rng};
use crate::{Error, Result};

pub const MLP_BUNDLE_KIND: &str = "mlp";

const STREAM_SHUFFLE: u64 = 0x5AFF1E;
const STREAM_DROPOUT: u64 = 0xD80F;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub val_frac: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 64],
            dropout: 0.3,
            lr: 1e-3,
            batch_size: 64,
            epochs: 200,
            patience: 10,
            val_frac: 0.1,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dropout >= 1.0 {
            return Err(Error::NoSignal(format!("dropout rate {} drops every unit", self.dropout)));
        }
        if self.dropout < 0.0 {
            return Err(Error::InvalidConfig(format!("dropout rate {} is negative", self.dropout)));
        }
        if self.batch_size == 0 || self.lr <= 0.0 {
            return Err(Error::InvalidConfig("batch_size and lr must be positive".into()));
        }
        Ok(())
    }
}

/// `[d → hidden.. → 3]` with ReLU; dropout only while training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: Mlp,
    pub dropout: f64,
    pub history: Vec<EpochRecord>,
}

impl MlpModel {
    pub fn init(d: usize, cfg: &MlpConfig) -> Self {
        let mut widths = vec![d];
        widths.extend(&cfg.hidden);
        widths.push(3);
        Self {
            net: Mlp::init(&mut rng(cfg.seed), &widths),
            dropout: cfg.dropout,
            history: Vec::new(),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        flatten(self.net.slices())
    }

    pub fn set_params(&mut self, p: &[f64]) {
        unflatten(self.net.slices_mut(), p);
    }

    /// Mean cross-entropy without dropout.
    pub fn loss(&self, x: ArrayView2<f64>, y: &[usize]) -> f64 {
        cross_entropy(&softmax_rows(&self.net.logits(x)), y)
    }

    /// Loss and flat gradient with dropout off.
    pub fn loss_and_grad(&self, x: ArrayView2<f64>, y: &[usize]) -> (f64, Vec<f64>) {
        let cache = self.net.forward_train(x, None);
        let p = softmax_rows(&cache.logits);
        let loss = cross_entropy(&p, y);
        let (g, _) = self.net.backward(&cache, ce_grad(p, y));
        (loss, g)
    }

    pub fn to_bundle(&self) -> Bundle {
        let widths: Vec<usize> = std::iter::once(self.net.input_width())
            .chain(self.net.layers.iter().map(|l| l.fan_out()))
            .collect();
        let mut b = Bundle::new(
            MLP_BUNDLE_KIND,
            json!({ "widths": widths, "dropout": self.dropout, "history": self.history }),
        );
        for (i, l) in self.net.layers.iter().enumerate() {
            push_dense(&mut b, &format!("layer{i}"), l);
        }
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        b.expect_kind(MLP_BUNDLE_KIND)?;
        let widths: Vec<usize> = serde_json::from_value(b.meta["widths"].clone())?;
        let layers = (0..widths.len().saturating_sub(1))
            .map(|i| read_dense(b, &format!("layer{i}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            net: Mlp { layers },
            dropout: b.meta["dropout"].as_f64().unwrap_or(0.0),
            history: serde_json::from_value(b.meta["history"].clone()).unwrap_or_default(),
        })
    }
}

/// d(mean CE)/d(logits) = (p - onehot(y)) / n.
pub(crate) fn ce_grad(mut p: Array2<f64>, y: &[usize]) -> Array2<f64> {
    for (i, &c) in y.iter().enumerate() {
        p[[i, c]] -= 1.0;
    }
    p / y.len().max(1) as f64
}

impl Classifier for MlpModel {
    fn input_width(&self) -> usize {
        self.net.input_width()
    }

    fn predict_proba_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64> {
        softmax_rows(&self.net.logits(x))
    }
}

/// Mini-batch Adam on cross-entropy. Batch order and dropout masks come from
/// per-epoch sub-seeds; early stopping restores the best validation epoch.
pub fn train_mlp(x: ArrayView2<f64>, y: &[usize], cfg: &MlpConfig) -> Result<MlpModel> {
    cfg.validate()?;
    check_labels(x, y)?;
    let (tr, va) = validation_split(y, cfg.val_frac, cfg.seed);
    let xv = select_rows(x, &va);
    let yv: Vec<usize> = va.iter().map(|&i| y[i]).collect();

    let mut model = MlpModel::init(x.ncols(), cfg);
    let mut params = model.params();
    let mut adam = Adam::new(params.len(), cfg.lr);
    let mut stop = EarlyStopping::new(cfg.patience, params.clone());
    let mut history = Vec::new();
    let mut order = tr.clone();
    for epoch in 0..cfg.epochs {
        order.copy_from_slice(&tr);
        order.shuffle(&mut sub_rng(cfg.seed, STREAM_SHUFFLE, epoch as u64));
        let mut drop_rng = sub_rng(cfg.seed, STREAM_DROPOUT, epoch as u64);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb = select_rows(x, batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let cache = model.net.forward_train(xb.view(), Some((&mut drop_rng, cfg.dropout)));
            let p = softmax_rows(&cache.logits);
            total += cross_entropy(&p, &yb) * yb.len() as f64;
            let (g, _) = model.net.backward(&cache, ce_grad(p, &yb));
            adam.step(&mut params, &g);
            model.set_params(&params);
        }
        let train_loss = total / tr.len().max(1) as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged(format!("mlp loss {train_loss} at epoch {epoch}")));
        }
        let val_loss = if yv.is_empty() { train_loss } else { model.loss(xv.view(), &yv) };
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if !yv.is_empty() && stop.observe(epoch, val_loss, &params) {
            break;
        }
    }
    if !yv.is_empty() {
        model.set_params(&stop.best_params);
    }
    model.history = history;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{predict_labels, LogisticModel};
    use crate::nn::{max_relative_error, numeric_gradient};
    use ndarray::array;

    #[test]
    fn xor_is_learned() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let cfg = MlpConfig {
            dropout: 0.0,
            epochs: 2000,
            val_frac: 0.0,
            seed: 5,
            ..Default::default()
        };
        let m = train_mlp(x.view(), &y, &cfg).unwrap();
        assert_eq!(predict_labels(&m.predict_proba(x.view()).unwrap()), y.to_vec());
    }

    #[test]
    fn full_dropout_has_no_signal() {
        let cfg = MlpConfig {
            dropout: 1.0,
            ..Default::default()
        };
        let e = train_mlp(array![[0.0], [1.0]].view(), &[0, 1], &cfg).unwrap_err();
        assert!(matches!(e, Error::NoSignal(_)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = array![[0.3, -1.2, 0.5], [1.1, 0.4, -0.7], [-0.2, 0.9, 1.5], [0.8, -0.3, 0.1]];
        let y = [0, 1, 2, 1];
        let m = MlpModel::init(
            3,
            &MlpConfig {
                hidden: vec![8, 5],
                seed: 3,
                ..Default::default()
            },
        );
        let (_, g) = m.loss_and_grad(x.view(), &y);
        let num = numeric_gradient(&m.params(), 1e-5, |p| {
            let mut mm = m.clone();
            mm.set_params(p);
            mm.loss(x.view(), &y)
        });
        assert!(max_relative_error(&g, &num, 1e-6) < 1e-4);
    }

    #[test]
    fn no_hidden_layers_is_logistic() {
        let cfg = MlpConfig {
            hidden: vec![],
            ..Default::default()
        };
        let m = MlpModel::init(3, &cfg);
        let mut lr = LogisticModel::zeros(3, 0.0);
        lr.layer = m.net.layers[0].clone();
        let x = array![[0.3, -1.2, 0.5], [1.1, 0.4, -0.7]];
        assert_eq!(m.predict_proba(x.view()).unwrap(), lr.predict_proba(x.view()).unwrap());
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        let y: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let cfg = MlpConfig {
            hidden: vec![16, 8],
            epochs: 5,
            seed: 9,
            ..Default::default()
        };
        let a = train_mlp(x.view(), &y, &cfg).unwrap();
        let b = train_mlp(x.view(), &y, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        let back = MlpModel::from_bundle(&Bundle::from_bytes(&a.to_bundle().to_bytes().unwrap()).unwrap()).unwrap();
        assert_eq!(back.net.layers.len(), 3);
    }
}
