//! Brute-force reference implementations, written for clarity rather than
//! speed and sharing no code with the library.
#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use rand::Rng;

pub fn pred(probs: ArrayView2<f64>, i: usize) -> usize {
    let mut best = 0;
    for c in 1..3 {
        if probs[[i, c]] > probs[[i, best]] {
            best = c;
        }
    }
    best
}

pub fn accuracy(y: &[usize], probs: ArrayView2<f64>) -> f64 {
    let hits = (0..y.len()).filter(|&i| pred(probs, i) == y[i]).count();
    hits as f64 / y.len() as f64
}

pub fn macro_f1(y: &[usize], probs: ArrayView2<f64>) -> f64 {
    let mut total = 0.0;
    for c in 0..3 {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for i in 0..y.len() {
            match (pred(probs, i) == c, y[i] == c) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                _ => {}
            }
        }
        // F1 = 2TP / (2TP + FP + FN), 0 when undefined.
        if tp > 0.0 {
            total += 2.0 * tp / (2.0 * tp + fp + fn_);
        }
    }
    total / 3.0
}

/// Pair-counting AUC: P(score_pos > score_neg) + P(tie) / 2.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

pub fn auc_ovr(y: &[usize], probs: ArrayView2<f64>) -> Option<f64> {
    let aucs: Vec<f64> = (0..3)
        .filter_map(|c| {
            let pos: Vec<bool> = y.iter().map(|t| *t == c).collect();
            auc(&probs.column(c).to_vec(), &pos)
        })
        .collect();
    (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Mean over positives of the precision among everything scored at least
/// as high.
pub fn average_precision(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let pos: Vec<usize> = (0..scores.len()).filter(|&i| positive[i]).collect();
    if pos.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for &i in &pos {
        let above: Vec<usize> = (0..scores.len()).filter(|&j| scores[j] >= scores[i]).collect();
        let hits = above.iter().filter(|&&j| positive[j]).count();
        sum += hits as f64 / above.len() as f64;
    }
    Some(sum / pos.len() as f64)
}

pub fn pr_auc_dropout(y: &[usize], probs: ArrayView2<f64>) -> Option<f64> {
    let pos: Vec<bool> = y.iter().map(|t| *t == 1).collect();
    average_precision(&probs.column(1).to_vec(), &pos)
}

pub fn ece(y: &[usize], probs: ArrayView2<f64>, bins: usize) -> f64 {
    let mut total = 0.0;
    for b in 0..bins {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        let members: Vec<usize> = (0..y.len())
            .filter(|&i| {
                let c = probs[[i, pred(probs, i)]];
                c >= lo && (c < hi || b == bins - 1)
            })
            .collect();
        if members.is_empty() {
            continue;
        }
        let conf: f64 = members.iter().map(|&i| probs[[i, pred(probs, i)]]).sum::<f64>() / members.len() as f64;
        let acc = members.iter().filter(|&&i| pred(probs, i) == y[i]).count() as f64 / members.len() as f64;
        total += members.len() as f64 / y.len() as f64 * (conf - acc).abs();
    }
    total
}

/// Random probability rows; with `grid` the entries are multiples of 0.1 so
/// ties between rows are common.
pub fn random_probs(rng: &mut impl Rng, n: usize, grid: bool) -> Array2<f64> {
    let mut p = Array2::zeros((n, 3));
    for i in 0..n {
        let w: [f64; 3] = if grid {
            let a = rng.random_range(0..=10);
            let b = rng.random_range(0..=10 - a);
            [a as f64, b as f64, (10 - a - b) as f64]
        } else {
            [rng.random::<f64>() + 1e-3, rng.random::<f64>() + 1e-3, rng.random::<f64>() + 1e-3]
        };
        let s: f64 = w.iter().sum();
        for c in 0..3 {
            p[[i, c]] = w[c] / s;
        }
    }
    p
}
