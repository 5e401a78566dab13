use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::focal::{focal_grad_logits, focal_loss};
use crate::bundle::Bundle;
use crate::models::Classifier;
use crate::nn::{
    flatten, push_dense, read_dense, select_rows, sigmoid, softmax_rows, unflatten,
    validation_split, Adam, Dense, EarlyStopping, EpochRecord, Mlp,
};
use crate::util::{rng, softmax, sub_rng};
use crate::{Error, Result};

pub const TRIAD_BUNDLE_KIND: &str = "triad";

const STREAM_SHUFFLE: u64 = 0x7_51AD;
const STREAM_DROPOUT: u64 = 0x7_D80F;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriadConfig {
    pub d_model: usize,
    pub heads: usize,
    /// Hidden width of the classification head (256 → hidden → 3).
    pub head_hidden: usize,
    pub gamma: f64,
    pub alpha: [f64; 3],
    /// When false the fused vector is the plain concatenation.
    pub gated: bool,
    pub dropout: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub val_frac: f64,
    pub seed: u64,
}

impl Default for TriadConfig {
    fn default() -> Self {
        Self {
            d_model: 128,
            heads: 4,
            head_hidden: 64,
            gamma: 2.0,
            alpha: [1.0; 3],
            gated: true,
            dropout: 0.3,
            lr: 1e-3,
            epochs: 100,
            batch_size: 64,
            patience: 10,
            val_frac: 0.1,
            seed: 0,
        }
    }
}

impl TriadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || !self.d_model.is_multiple_of(self.heads) {
            return Err(Error::InvalidConfig(format!(
                "d_model {} not divisible by {} heads",
                self.d_model, self.heads
            )));
        }
        if self.gamma < 0.0 || self.alpha.iter().any(|a| *a <= 0.0) {
            return Err(Error::InvalidConfig("focal gamma must be >= 0 and alpha > 0".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.batch_size == 0 || self.lr <= 0.0 {
            return Err(Error::InvalidConfig("batch_size and lr must be positive".into()));
        }
        Ok(())
    }

    pub fn head_width(&self) -> usize {
        self.d_model / self.heads
    }
}

/// Query, key and value maps (d_model × d_model, no bias) of one attention
/// direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMaps {
    pub q: Array2<f64>,
    pub k: Array2<f64>,
    pub v: Array2<f64>,
}

impl AttentionMaps {
    fn init(rng: &mut ChaCha8Rng, d: usize) -> Self {
        let bound = 1.0 / (d as f64).sqrt();
        let mut m = || Array2::from_shape_simple_fn((d, d), || rng.random_range(-bound..=bound));
        Self {
            q: m(),
            k: m(),
            v: m(),
        }
    }
}

/// Per-sample introspection of a forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionTrace {
    /// Tabular token attending over text keys: `[head][key]`.
    pub tab_to_text: Vec<Vec<f64>>,
    /// Text token attending over tabular keys: `[head][key]`.
    pub text_to_tab: Vec<Vec<f64>>,
    /// Gate value; absent for the concatenation variant.
    pub gate: Option<f64>,
    pub fused: Vec<f64>,
}

/// Gated cross-modal attention classifier. Each modality is one token, so
/// every attention row is a softmax over a single score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadModel {
    pub config: TriadConfig,
    pub proj_tab: Dense,
    pub proj_txt: Dense,
    /// Direction 0: tabular queries text. Direction 1: text queries tabular.
    pub attn: [AttentionMaps; 2],
    pub gate_w: Array1<f64>,
    pub gate_b: Array1<f64>,
    pub head: Mlp,
    pub history: Vec<EpochRecord>,
}

struct Cache {
    h_tab: Array2<f64>,
    h_txt: Array2<f64>,
    a_tab: Array2<f64>,
    a_txt: Array2<f64>,
    gate: Option<Array1<f64>>,
    head: crate::nn::MlpCache,
}

/// Scaled dot-product scores of one query token against `keys`, per head,
/// softmaxed over keys.
fn head_weights(q: ArrayView1<f64>, keys: &[Array1<f64>], heads: usize) -> Vec<Vec<f64>> {
    let hw = q.len() / heads;
    let scale = 1.0 / (hw as f64).sqrt();
    (0..heads)
        .map(|h| {
            let r = h * hw..(h + 1) * hw;
            let scores: Vec<f64> = keys
                .iter()
                .map(|k| q.slice(s![r.clone()]).dot(&k.slice(s![r.clone()])) * scale)
                .collect();
            softmax(&scores)
        })
        .collect()
}

impl TriadModel {
    pub fn init(d_tab: usize, d_txt: usize, cfg: &TriadConfig) -> Result<Self> {
        cfg.validate()?;
        let mut r = rng(cfg.seed);
        let d = cfg.d_model;
        let proj_tab = Dense::init(&mut r, d_tab, d);
        let proj_txt = Dense::init(&mut r, d_txt, d);
        let attn = [AttentionMaps::init(&mut r, d), AttentionMaps::init(&mut r, d)];
        let bound = 1.0 / ((2 * d) as f64).sqrt();
        let gate_w = Array1::from_shape_simple_fn(2 * d, || r.random_range(-bound..=bound));
        let head = Mlp::init(&mut r, &[2 * d, cfg.head_hidden, 3]);
        Ok(Self {
            config: cfg.clone(),
            proj_tab,
            proj_txt,
            attn,
            gate_w,
            gate_b: Array1::zeros(1),
            head,
            history: Vec::new(),
        })
    }

    pub fn tab_width(&self) -> usize {
        self.proj_tab.fan_in()
    }

    pub fn txt_width(&self) -> usize {
        self.proj_txt.fan_in()
    }

    fn check(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>) -> Result<()> {
        if x_tab.ncols() != self.tab_width() {
            return Err(Error::WidthMismatch {
                expected: self.tab_width(),
                got: x_tab.ncols(),
            });
        }
        if x_txt.ncols() != self.txt_width() {
            return Err(Error::WidthMismatch {
                expected: self.txt_width(),
                got: x_txt.ncols(),
            });
        }
        if x_tab.nrows() != x_txt.nrows() {
            return Err(Error::LengthMismatch(x_tab.nrows(), x_txt.nrows()));
        }
        Ok(())
    }

    fn forward_cached(
        &self,
        x_tab: ArrayView2<f64>,
        x_txt: ArrayView2<f64>,
        dropout: Option<(&mut ChaCha8Rng, f64)>,
    ) -> Cache {
        let h_tab = self.proj_tab.forward(x_tab);
        let h_txt = self.proj_txt.forward(x_txt);
        // A single key per direction: the attention weight is exactly 1, so
        // each attended vector is the value projection of the other token.
        let a_tab = h_txt.dot(&self.attn[0].v);
        let a_txt = h_tab.dot(&self.attn[1].v);
        let (fused, gate) = if self.config.gated {
            let both = concatenate![Axis(1), a_tab, a_txt];
            let g = (both.dot(&self.gate_w) + self.gate_b[0]).mapv(sigmoid);
            let gc = g.view().insert_axis(Axis(1));
            let fused = concatenate![Axis(1), &a_tab * &gc, &a_txt * &(1.0 - &gc)];
            (fused, Some(g))
        } else {
            (concatenate![Axis(1), a_tab, a_txt], None)
        };
        let head = self.head.forward_train(fused.view(), dropout);
        Cache {
            h_tab,
            h_txt,
            a_tab,
            a_txt,
            gate,
            head,
        }
    }

    /// Class probabilities for a batch.
    pub fn predict(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(x_tab, x_txt)?;
        Ok(softmax_rows(&self.forward_cached(x_tab, x_txt, None).head.logits))
    }

    /// Probabilities and trace for one learner.
    pub fn forward(&self, x_tab: &[f64], x_txt: &[f64]) -> Result<(Vec<f64>, FusionTrace)> {
        let xt = ArrayView2::from_shape((1, x_tab.len()), x_tab).unwrap();
        let xx = ArrayView2::from_shape((1, x_txt.len()), x_txt).unwrap();
        self.check(xt, xx)?;
        let c = self.forward_cached(xt, xx, None);
        let p = softmax_rows(&c.head.logits).row(0).to_vec();
        let heads = self.config.heads;
        let q0 = c.h_tab.row(0).dot(&self.attn[0].q);
        let k0 = c.h_txt.row(0).dot(&self.attn[0].k);
        let q1 = c.h_txt.row(0).dot(&self.attn[1].q);
        let k1 = c.h_tab.row(0).dot(&self.attn[1].k);
        let fused = match &c.gate {
            Some(g) => {
                let g = g[0];
                c.a_tab.row(0).iter().map(|v| g * v).chain(c.a_txt.row(0).iter().map(|v| (1.0 - g) * v)).collect()
            }
            None => c.a_tab.row(0).iter().chain(c.a_txt.row(0).iter()).copied().collect(),
        };
        let trace = FusionTrace {
            tab_to_text: head_weights(q0.view(), &[k0], heads),
            text_to_tab: head_weights(q1.view(), &[k1], heads),
            gate: c.gate.map(|g| g[0]),
            fused,
        };
        Ok((p, trace))
    }

    /// Head-averaged attention of the tabular query over candidate text
    /// tokens (for example retrieved passages encoded as text vectors).
    pub fn text_attention(&self, x_tab: &[f64], candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let xt = ArrayView2::from_shape((1, x_tab.len()), x_tab).unwrap();
        let rows: Vec<f64> = candidates.iter().flatten().copied().collect();
        let xc = Array2::from_shape_vec((candidates.len(), self.txt_width()), rows).map_err(|_| {
            Error::WidthMismatch {
                expected: self.txt_width(),
                got: candidates[0].len(),
            }
        })?;
        if x_tab.len() != self.tab_width() {
            return Err(Error::WidthMismatch {
                expected: self.tab_width(),
                got: x_tab.len(),
            });
        }
        let q = self.proj_tab.forward(xt).row(0).dot(&self.attn[0].q);
        let keys: Vec<Array1<f64>> = self
            .proj_txt
            .forward(xc.view())
            .dot(&self.attn[0].k)
            .rows()
            .into_iter()
            .map(|r| r.to_owned())
            .collect();
        let w = head_weights(q.view(), &keys, self.config.heads);
        Ok((0..candidates.len())
            .map(|j| w.iter().map(|h| h[j]).sum::<f64>() / self.config.heads as f64)
            .collect())
    }

    fn slices(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::new();
        v.extend(self.proj_tab.slices());
        v.extend(self.proj_txt.slices());
        for a in &self.attn {
            v.push(a.q.as_slice().unwrap());
            v.push(a.k.as_slice().unwrap());
            v.push(a.v.as_slice().unwrap());
        }
        v.push(self.gate_w.as_slice().unwrap());
        v.push(self.gate_b.as_slice().unwrap());
        v.extend(self.head.slices());
        v
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::new();
        v.extend(self.proj_tab.slices_mut());
        v.extend(self.proj_txt.slices_mut());
        for a in &mut self.attn {
            v.push(a.q.as_slice_mut().unwrap());
            v.push(a.k.as_slice_mut().unwrap());
            v.push(a.v.as_slice_mut().unwrap());
        }
        v.push(self.gate_w.as_slice_mut().unwrap());
        v.push(self.gate_b.as_slice_mut().unwrap());
        v.extend(self.head.slices_mut());
        v
    }

    pub fn params(&self) -> Vec<f64> {
        flatten(self.slices())
    }

    pub fn set_params(&mut self, p: &[f64]) {
        unflatten(self.slices_mut(), p);
    }

    /// Focal loss with dropout off.
    pub fn loss(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>, y: &[usize]) -> f64 {
        let c = self.forward_cached(x_tab, x_txt, None);
        focal_loss(&softmax_rows(&c.head.logits), y, self.config.gamma, &self.config.alpha)
    }

    /// Focal loss and its flat gradient, in [`TriadModel::params`] order.
    pub fn loss_and_grad(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>, y: &[usize]) -> (f64, Vec<f64>) {
        self.loss_and_grad_with(x_tab, x_txt, y, None)
    }

    fn loss_and_grad_with(
        &self,
        x_tab: ArrayView2<f64>,
        x_txt: ArrayView2<f64>,
        y: &[usize],
        dropout: Option<(&mut ChaCha8Rng, f64)>,
    ) -> (f64, Vec<f64>) {
        let cfg = &self.config;
        let c = self.forward_cached(x_tab, x_txt, dropout);
        let p = softmax_rows(&c.head.logits);
        let loss = focal_loss(&p, y, cfg.gamma, &cfg.alpha);
        let (g_head, d_fused) = self.head.backward(&c.head, focal_grad_logits(&p, y, cfg.gamma, &cfg.alpha));

        let d = cfg.d_model;
        let d_fa = d_fused.slice(s![.., ..d]).to_owned();
        let d_fb = d_fused.slice(s![.., d..]).to_owned();
        let (d_a_tab, d_a_txt, g_gate_w, g_gate_b) = match &c.gate {
            Some(g) => {
                let gc = g.view().insert_axis(Axis(1));
                let dg = (&d_fa * &c.a_tab).sum_axis(Axis(1)) - (&d_fb * &c.a_txt).sum_axis(Axis(1));
                let ds = &dg * &g.mapv(|v| v * (1.0 - v));
                let both = concatenate![Axis(1), c.a_tab, c.a_txt];
                let gw = both.t().dot(&ds);
                let gb = Array1::from(vec![ds.sum()]);
                let dsc = ds.view().insert_axis(Axis(1));
                let da = &d_fa * &gc + &dsc * &self.gate_w.slice(s![..d]).insert_axis(Axis(0));
                let db = &d_fb * &(1.0 - &gc) + &dsc * &self.gate_w.slice(s![d..]).insert_axis(Axis(0));
                (da, db, gw, gb)
            }
            None => (d_fa, d_fb, Array1::zeros(2 * d), Array1::zeros(1)),
        };

        let g_v0 = c.h_txt.t().dot(&d_a_tab);
        let d_h_txt = d_a_tab.dot(&self.attn[0].v.t());
        let g_v1 = c.h_tab.t().dot(&d_a_txt);
        let d_h_tab = d_a_txt.dot(&self.attn[1].v.t());
        let (g_pt_w, g_pt_b, _) = self.proj_tab.backward(x_tab, d_h_tab.view());
        let (g_px_w, g_px_b, _) = self.proj_txt.backward(x_txt, d_h_txt.view());
        let zeros = Array2::<f64>::zeros((d, d));

        let mut grad = Vec::with_capacity(g_head.len() + 6 * d * d);
        for part in [
            g_pt_w.as_slice().unwrap(),
            g_pt_b.as_slice().unwrap(),
            g_px_w.as_slice().unwrap(),
            g_px_b.as_slice().unwrap(),
            zeros.as_slice().unwrap(),
            zeros.as_slice().unwrap(),
            g_v0.as_slice().unwrap(),
            zeros.as_slice().unwrap(),
            zeros.as_slice().unwrap(),
            g_v1.as_slice().unwrap(),
            g_gate_w.as_slice().unwrap(),
            g_gate_b.as_slice().unwrap(),
            &g_head,
        ] {
            grad.extend_from_slice(part);
        }
        (loss, grad)
    }

    pub fn to_bundle(&self) -> Bundle {
        let mut b = Bundle::new(
            TRIAD_BUNDLE_KIND,
            json!({
                "config": self.config,
                "d_tab": self.tab_width(),
                "d_txt": self.txt_width(),
                "history": self.history,
            }),
        );
        push_dense(&mut b, "proj_tab", &self.proj_tab);
        push_dense(&mut b, "proj_txt", &self.proj_txt);
        let d = self.config.d_model;
        for (i, a) in self.attn.iter().enumerate() {
            b.push(format!("attn{i}.q"), &[d, d], a.q.as_slice().unwrap());
            b.push(format!("attn{i}.k"), &[d, d], a.k.as_slice().unwrap());
            b.push(format!("attn{i}.v"), &[d, d], a.v.as_slice().unwrap());
        }
        b.push("gate.w", &[2 * d], self.gate_w.as_slice().unwrap());
        b.push("gate.b", &[1], self.gate_b.as_slice().unwrap());
        for (i, l) in self.head.layers.iter().enumerate() {
            push_dense(&mut b, &format!("head{i}"), l);
        }
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        b.expect_kind(TRIAD_BUNDLE_KIND)?;
        let config: TriadConfig = serde_json::from_value(b.meta["config"].clone())?;
        let d = config.d_model;
        let mat = |name: String| -> Result<Array2<f64>> {
            let (_, v) = b.tensor(&name)?;
            Array2::from_shape_vec((d, d), v).map_err(|e| Error::BadBundle(e.to_string()))
        };
        let mut attn = Vec::new();
        for i in 0..2 {
            attn.push(AttentionMaps {
                q: mat(format!("attn{i}.q"))?,
                k: mat(format!("attn{i}.k"))?,
                v: mat(format!("attn{i}.v"))?,
            });
        }
        let [a0, a1]: [AttentionMaps; 2] = attn.try_into().unwrap();
        Ok(Self {
            proj_tab: read_dense(b, "proj_tab")?,
            proj_txt: read_dense(b, "proj_txt")?,
            attn: [a0, a1],
            gate_w: Array1::from(b.tensor("gate.w")?.1),
            gate_b: Array1::from(b.tensor("gate.b")?.1),
            head: Mlp {
                layers: vec![read_dense(b, "head0")?, read_dense(b, "head1")?],
            },
            history: serde_json::from_value(b.meta["history"].clone()).unwrap_or_default(),
            config,
        })
    }
}

/// Mini-batch Adam on the focal loss, with per-epoch seeded batch order and
/// head dropout. Early stopping uses the focal loss of a stratified
/// validation slice and restores the best epoch.
pub fn train_triad(
    x_tab: ArrayView2<f64>,
    x_txt: ArrayView2<f64>,
    y: &[usize],
    cfg: &TriadConfig,
) -> Result<TriadModel> {
    let mut model = TriadModel::init(x_tab.ncols(), x_txt.ncols(), cfg)?;
    model.check(x_tab, x_txt)?;
    crate::models::check_labels(x_tab, y)?;
    let (tr, va) = validation_split(y, cfg.val_frac, cfg.seed);
    let xv_tab = select_rows(x_tab, &va);
    let xv_txt = select_rows(x_txt, &va);
    let yv: Vec<usize> = va.iter().map(|&i| y[i]).collect();

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
            let bt = select_rows(x_tab, batch);
            let bx = select_rows(x_txt, batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let (loss, g) = model.loss_and_grad_with(bt.view(), bx.view(), &yb, Some((&mut drop_rng, cfg.dropout)));
            total += loss * yb.len() as f64;
            adam.step(&mut params, &g);
            model.set_params(&params);
        }
        let train_loss = total / tr.len().max(1) as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged(format!("focal loss {train_loss} at epoch {epoch}")));
        }
        let val_loss = if yv.is_empty() {
            train_loss
        } else {
            model.loss(xv_tab.view(), xv_txt.view(), &yv)
        };
        log::debug!("triad epoch {epoch}: train {train_loss:.5} val {val_loss:.5}");
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

/// Adapter exposing one branch-pair model as a [`Classifier`] over the
/// column concatenation `[x_tab ‖ x_txt]`.
#[derive(Debug, Clone)]
pub struct ConcatInput<'a> {
    pub model: &'a TriadModel,
}

impl Classifier for ConcatInput<'_> {
    fn input_width(&self) -> usize {
        self.model.tab_width() + self.model.txt_width()
    }

    fn predict_proba_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let dt = self.model.tab_width();
        let c = self
            .model
            .forward_cached(x.slice(s![.., ..dt]), x.slice(s![.., dt..]), None);
        softmax_rows(&c.head.logits)
    }
}
