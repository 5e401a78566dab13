use std::time::Instant;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::metrics::resample_rows;
use crate::util::sub_rng;
use crate::{Error, Result};
use rand::Rng;

const STREAM_BOOTSTRAP: u64 = 0xB007;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Linear-interpolation quantile of sorted, non-empty values.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn resample_index(seed: u64, r: usize, n: usize) -> Vec<usize> {
    let mut g = sub_rng(seed, STREAM_BOOTSTRAP, r as u64);
    (0..n).map(|_| g.random_range(0..n)).collect()
}

fn percentile(mut values: Vec<f64>, alpha: f64) -> Result<Interval> {
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return Err(Error::DegenerateLabels("metric undefined on every resample".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(Interval {
        lo: quantile_sorted(&values, alpha / 2.0),
        hi: quantile_sorted(&values, 1.0 - alpha / 2.0),
    })
}

fn check_bootstrap(n: usize, resamples: usize, alpha: f64) -> Result<()> {
    if resamples == 0 {
        return Err(Error::InvalidReps);
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!("bootstrap needs n >= 2, got {n}")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// Percentile interval `[α/2, 1−α/2]` of `metric` over seeded row resamples
/// with replacement. Resample `r` draws from its own sub-seed, so the result
/// does not depend on evaluation order. Resamples where the metric is not
/// finite (for example an AUC with one class drawn) are dropped.
pub fn bootstrap_ci<F>(
    metric: F,
    y: &[usize],
    probs: ArrayView2<f64>,
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<Interval>
where
    F: Fn(&[usize], ArrayView2<f64>) -> f64,
{
    check_bootstrap(y.len(), resamples, alpha)?;
    if y.len() != probs.nrows() {
        return Err(Error::LengthMismatch(y.len(), probs.nrows()));
    }
    let values = (0..resamples)
        .map(|r| {
            let (yr, pr) = resample_rows(y, probs, &resample_index(seed, r, y.len()));
            metric(&yr, pr.view())
        })
        .collect();
    percentile(values, alpha)
}

/// Bootstrap of `metric(a) − metric(b)` with both models scored on the same
/// resampled rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub delta: f64,
    pub ci: Interval,
    /// Fraction of resamples with a strictly positive difference.
    pub win_rate: f64,
}

pub fn paired_bootstrap<F>(
    metric: F,
    y: &[usize],
    probs_a: ArrayView2<f64>,
    probs_b: ArrayView2<f64>,
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<PairedComparison>
where
    F: Fn(&[usize], ArrayView2<f64>) -> f64,
{
    check_bootstrap(y.len(), resamples, alpha)?;
    for p in [probs_a, probs_b] {
        if y.len() != p.nrows() {
            return Err(Error::LengthMismatch(y.len(), p.nrows()));
        }
    }
    let deltas: Vec<f64> = (0..resamples)
        .map(|r| {
            let idx = resample_index(seed, r, y.len());
            let (yr, pa) = resample_rows(y, probs_a, &idx);
            let pb = probs_b.select(ndarray::Axis(0), &idx);
            metric(&yr, pa.view()) - metric(&yr, pb.view())
        })
        .collect();
    let finite: Vec<f64> = deltas.iter().copied().filter(|d| d.is_finite()).collect();
    let win_rate = finite.iter().filter(|d| **d > 0.0).count() as f64 / finite.len().max(1) as f64;
    Ok(PairedComparison {
        delta: metric(y, probs_a) - metric(y, probs_b),
        ci: percentile(deltas, alpha)?,
        win_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    /// Rows model A gets wrong and model B gets right.
    pub b: usize,
    /// Rows model A gets right and model B gets wrong.
    pub c: usize,
    pub chi2: f64,
    pub p_value: f64,
}

/// McNemar's test without continuity correction:
/// `χ² = (b − c)² / (b + c)`, p from the upper tail of χ²(1).
pub fn mcnemar(b: usize, c: usize) -> Result<McNemar> {
    if b + c == 0 {
        return Err(Error::NoDiscordantPairs);
    }
    let d = b as f64 - c as f64;
    let chi2 = d * d / (b + c) as f64;
    let p_value = ChiSquared::new(1.0).expect("1 dof").sf(chi2);
    Ok(McNemar { b, c, chi2, p_value })
}

/// Discordant counts `(b, c)` between two label vectors against the truth.
pub fn discordant_counts(y: &[usize], pred_a: &[usize], pred_b: &[usize]) -> Result<(usize, usize)> {
    if y.len() != pred_a.len() || y.len() != pred_b.len() {
        return Err(Error::LengthMismatch(y.len(), pred_a.len().min(pred_b.len())));
    }
    let mut b = 0;
    let mut c = 0;
    for ((t, a), bb) in y.iter().zip(pred_a).zip(pred_b) {
        match (a == t, bb == t) {
            (false, true) => b += 1,
            (true, false) => c += 1,
            _ => {}
        }
    }
    Ok((b, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub reps: usize,
}

/// Times `score(i)` for `reps` calls after `warmup` untimed ones, cycling
/// through `n_items` learners. p95 is the nearest-rank order statistic.
pub fn measure_latency<F: FnMut(usize)>(n_items: usize, warmup: usize, reps: usize, mut score: F) -> Result<LatencyStats> {
    if reps == 0 || n_items == 0 {
        return Err(Error::InvalidReps);
    }
    for i in 0..warmup {
        score(i % n_items);
    }
    let mut times: Vec<f64> = (0..reps)
        .map(|i| {
            let t = Instant::now();
            score(i % n_items);
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let rank = ((0.95 * reps as f64).ceil() as usize).clamp(1, reps);
    Ok(LatencyStats {
        mean_ms: times.iter().sum::<f64>() / reps as f64,
        p95_ms: times[rank - 1],
        max_ms: times[reps - 1],
        reps,
    })
}
