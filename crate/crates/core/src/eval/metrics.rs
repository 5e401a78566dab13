use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::util::argmax;
use crate::{Error, Result};

pub const DROPOUT: usize = 1;

/// Counting metrics over three classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    /// `confusion[actual][predicted]`.
    pub confusion: [[usize; 3]; 3],
}

fn check(y: &[usize], probs: ArrayView2<f64>) -> Result<()> {
    if y.len() != probs.nrows() {
        return Err(Error::LengthMismatch(y.len(), probs.nrows()));
    }
    if probs.ncols() != 3 {
        return Err(Error::WidthMismatch {
            expected: 3,
            got: probs.ncols(),
        });
    }
    if let Some(bad) = y.iter().find(|c| **c > 2) {
        return Err(Error::InvalidConfig(format!("label {bad} outside 0..=2")));
    }
    Ok(())
}

fn row_argmax(probs: ArrayView2<f64>, i: usize) -> usize {
    let r = probs.row(i);
    argmax(&[r[0], r[1], r[2]])
}

/// Confusion matrix, per-class precision/recall/F1, accuracy and macro-F1.
/// Precision or recall with a zero denominator is 0, and so is F1 when both
/// are 0.
pub fn classification_metrics(y: &[usize], probs: ArrayView2<f64>) -> Result<ClassMetrics> {
    check(y, probs)?;
    let mut confusion = [[0usize; 3]; 3];
    for (i, &t) in y.iter().enumerate() {
        confusion[t][row_argmax(probs, i)] += 1;
    }
    Ok(metrics_from_confusion(confusion))
}

pub fn metrics_from_confusion(confusion: [[usize; 3]; 3]) -> ClassMetrics {
    let n: usize = confusion.iter().flatten().sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut f1 = [0.0; 3];
    for c in 0..3 {
        let tp = confusion[c][c];
        let predicted: usize = (0..3).map(|a| confusion[a][c]).sum();
        let actual: usize = confusion[c].iter().sum();
        precision[c] = ratio(tp, predicted);
        recall[c] = ratio(tp, actual);
        let s = precision[c] + recall[c];
        f1[c] = if s == 0.0 { 0.0 } else { 2.0 * precision[c] * recall[c] / s };
    }
    let correct: usize = (0..3).map(|c| confusion[c][c]).sum();
    ClassMetrics {
        accuracy: ratio(correct, n),
        macro_f1: f1.iter().sum::<f64>() / 3.0,
        precision,
        recall,
        f1,
        confusion,
    }
}

/// Midrank-based AUC of `scores` for the positive set; `None` when either
/// side is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let np = n_pos as f64;
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// Macro average of the one-vs-rest AUCs. A class absent from `y` is
/// skipped with a warning.
pub fn roc_auc_ovr(y: &[usize], probs: ArrayView2<f64>) -> Result<f64> {
    check(y, probs)?;
    let mut aucs = Vec::new();
    for c in 0..3 {
        let pos: Vec<bool> = y.iter().map(|t| *t == c).collect();
        let scores = probs.column(c).to_vec();
        match binary_auc(&scores, &pos) {
            Some(a) => aucs.push(a),
            None if pos.iter().any(|p| *p) => {}
            None => log::warn!("class {c} absent; skipped in OvR AUC"),
        }
    }
    if aucs.is_empty() {
        return Err(Error::DegenerateLabels("fewer than two classes present".into()));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Average precision: `Σ (R_k − R_{k−1}) P_k` over distinct score
/// thresholds in decreasing order. Tied scores enter together.
pub fn average_precision(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    if n_pos == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut ap, mut prev_recall) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        tp += order[i..=j].iter().filter(|&&k| positive[k]).count();
        seen += j - i + 1;
        let recall = tp as f64 / n_pos as f64;
        ap += (recall - prev_recall) * tp as f64 / seen as f64;
        prev_recall = recall;
        i = j + 1;
    }
    Some(ap)
}

/// Average precision of the Dropout column.
pub fn pr_auc_dropout(y: &[usize], probs: ArrayView2<f64>) -> Result<f64> {
    check(y, probs)?;
    let pos: Vec<bool> = y.iter().map(|t| *t == DROPOUT).collect();
    average_precision(&probs.column(DROPOUT).to_vec(), &pos)
        .ok_or_else(|| Error::DegenerateLabels("no Dropout rows".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Mean max-probability in the bin; 0 when empty.
    pub confidence: f64,
    /// Fraction of correct argmax predictions in the bin; 0 when empty.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBins {
    pub bins: Vec<CalibrationBin>,
}

/// Expected calibration error over `n_bins` equal-width bins of the max
/// predicted probability. Bin `b` holds `[b/B, (b+1)/B)`, the last bin is
/// closed at 1.
pub fn ece(y: &[usize], probs: ArrayView2<f64>, n_bins: usize) -> Result<(f64, CalibrationBins)> {
    check(y, probs)?;
    if n_bins == 0 {
        return Err(Error::InvalidConfig("ece needs at least one bin".into()));
    }
    let mut count = vec![0usize; n_bins];
    let mut conf = vec![0.0; n_bins];
    let mut hit = vec![0.0; n_bins];
    for (i, &t) in y.iter().enumerate() {
        let k = row_argmax(probs, i);
        let c = probs[[i, k]];
        let b = ((c * n_bins as f64).floor() as usize).min(n_bins - 1);
        count[b] += 1;
        conf[b] += c;
        hit[b] += (k == t) as u8 as f64;
    }
    let n = y.len().max(1) as f64;
    let mut total = 0.0;
    let bins = (0..n_bins)
        .map(|b| {
            let (confidence, accuracy) = if count[b] == 0 {
                (0.0, 0.0)
            } else {
                (conf[b] / count[b] as f64, hit[b] / count[b] as f64)
            };
            total += count[b] as f64 / n * (confidence - accuracy).abs();
            CalibrationBin {
                lower: b as f64 / n_bins as f64,
                upper: (b + 1) as f64 / n_bins as f64,
                count: count[b],
                confidence,
                accuracy,
            }
        })
        .collect();
    Ok((total, CalibrationBins { bins }))
}

/// Rows of `probs` selected by `idx`, with the matching labels.
pub fn resample_rows(y: &[usize], probs: ArrayView2<f64>, idx: &[usize]) -> (Vec<usize>, Array2<f64>) {
    (idx.iter().map(|&i| y[i]).collect(), probs.select(ndarray::Axis(0), idx))
}
