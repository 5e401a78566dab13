//! SMOTENC oversampling of the training fold to exact class balance.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Code;
use crate::util::{median, sub_rng};
use crate::{Error, Result};

/// A training row split into its interpolable and categorical parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedRow {
    /// z-scored numeric features.
    pub dense: Vec<f64>,
    pub codes: Vec<Code>,
    pub label: usize,
    /// Index of the original row this one came from (itself for originals,
    /// the interpolation seed for synthetic rows).
    pub source: usize,
    pub synthetic: bool,
    /// Carried features interpolated with the same step as `dense` but left
    /// out of neighbour distances.
    #[serde(default)]
    pub aux_interp: Vec<f64>,
    /// Carried features copied from the seed row.
    #[serde(default)]
    pub aux_copy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub k_neighbors: usize,
    /// Per-class target; `None` means the current largest class count.
    pub target: Option<usize>,
    pub seed: u64,
}

impl Default for ResamplePlan {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target: None,
            seed: 0,
        }
    }
}

fn sq_dist(a: &MixedRow, b: &MixedRow, penalty_sq: f64) -> f64 {
    let num: f64 = a.dense.iter().zip(&b.dense).map(|(x, y)| (x - y).powi(2)).sum();
    let mismatches = a.codes.iter().zip(&b.codes).filter(|(x, y)| x != y).count();
    num + mismatches as f64 * penalty_sq
}

/// Median over numeric columns of the within-class standard deviation.
pub fn mismatch_penalty(rows: &[&MixedRow]) -> f64 {
    let Some(first) = rows.first() else {
        return 0.0;
    };
    let n = rows.len() as f64;
    let sds: Vec<f64> = (0..first.dense.len())
        .map(|j| {
            let m = rows.iter().map(|r| r.dense[j]).sum::<f64>() / n;
            (rows.iter().map(|r| (r.dense[j] - m).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();
    median(&sds).unwrap_or(0.0)
}

/// The `k` nearest other members of `members` for each member, by
/// (distance, position).
fn neighbours(members: &[&MixedRow], k: usize, penalty_sq: f64) -> Vec<Vec<usize>> {
    (0..members.len())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..members.len())
                .filter(|&j| j != i)
                .map(|j| (sq_dist(members[i], members[j], penalty_sq), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

fn vote(seed: Code, values: impl Iterator<Item = Code>) -> Code {
    let mut counts: HashMap<Code, usize> = HashMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    let mut winners: Vec<Code> = counts.into_iter().filter(|(_, c)| *c == best).map(|(v, _)| v).collect();
    if winners.len() == 1 {
        winners.pop().unwrap()
    } else {
        seed
    }
}

/// Oversamples every class below the target. Synthetic numeric values lie on
/// the segment from a random seed row to one of its `k` nearest same-class
/// neighbours; categorical values are the neighbours' mode, with ties going
/// to the seed row's value. Originals come first in input order, followed
/// by synthetic rows grouped by class.
pub fn smotenc_balance(rows: &[MixedRow], plan: &ResamplePlan) -> Result<Vec<MixedRow>> {
    if plan.k_neighbors == 0 {
        return Err(Error::InvalidConfig("k_neighbors must be at least 1".into()));
    }
    let mut hist = [0usize; 3];
    for r in rows {
        hist[r.label] += 1;
    }
    let max = *hist.iter().max().unwrap();
    let target = plan.target.unwrap_or(max);
    if target < max {
        return Err(Error::InvalidConfig(format!("target {target} below largest class {max}")));
    }
    let mut out = rows.to_vec();
    for (class, &count) in hist.iter().enumerate() {
        if count == 0 || count >= target {
            continue;
        }
        if count <= plan.k_neighbors {
            return Err(Error::TooFewMinoritySamples {
                class,
                count,
                k: plan.k_neighbors,
            });
        }
        let members: Vec<&MixedRow> = rows.iter().filter(|r| r.label == class).collect();
        let penalty = mismatch_penalty(&members);
        let nn = neighbours(&members, plan.k_neighbors, penalty * penalty);
        for s in 0..target - count {
            let mut rng = sub_rng(plan.seed, 0x5307E + class as u64, s as u64);
            let i = rng.random_range(0..members.len());
            let j = nn[i][rng.random_range(0..nn[i].len())];
            let t: f64 = rng.random();
            let (a, b) = (members[i], members[j]);
            let dense = a.dense.iter().zip(&b.dense).map(|(x, y)| x + t * (y - x)).collect();
            let codes = (0..a.codes.len())
                .map(|c| vote(a.codes[c], nn[i].iter().map(|&n| members[n].codes[c])))
                .collect();
            let aux_interp = a.aux_interp.iter().zip(&b.aux_interp).map(|(x, y)| x + t * (y - x)).collect();
            out.push(MixedRow {
                dense,
                codes,
                label: class,
                source: a.source,
                synthetic: true,
                aux_interp,
                aux_copy: a.aux_copy.clone(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dense: Vec<f64>, codes: Vec<i64>, label: usize, source: usize) -> MixedRow {
        MixedRow {
            aux_interp: dense.iter().map(|v| 10.0 * v).collect(),
            aux_copy: vec![source as f64],
            dense,
            codes: codes.into_iter().map(Code::Level).collect(),
            label,
            source,
            synthetic: false,
        }
    }

    #[test]
    fn toy_segment() {
        let mut rows = vec![row(vec![0.0, 0.0], vec![1], 1, 0), row(vec![1.0, 1.0], vec![1], 1, 1)];
        for i in 0..6 {
            rows.push(row(vec![i as f64, 0.0], vec![2], 0, 2 + i));
        }
        let plan = ResamplePlan {
            k_neighbors: 1,
            ..Default::default()
        };
        let out = smotenc_balance(&rows, &plan).unwrap();
        let synth: Vec<&MixedRow> = out.iter().filter(|r| r.synthetic).collect();
        assert_eq!(synth.len(), 4);
        for r in synth {
            assert_eq!(r.dense[0], r.dense[1]);
            assert!((0.0..=1.0).contains(&r.dense[0]));
            assert_eq!(r.codes, vec![Code::Level(1)]);
            assert!((r.aux_interp[0] - 10.0 * r.dense[0]).abs() < 1e-12);
            assert_eq!(r.aux_copy, vec![r.source as f64]);
        }
    }

    #[test]
    fn balanced_is_noop() {
        let rows: Vec<MixedRow> = (0..9).map(|i| row(vec![i as f64], vec![0], i % 3, i)).collect();
        let out = smotenc_balance(&rows, &ResamplePlan::default()).unwrap();
        assert_eq!(out, rows);
    }

    #[test]
    fn too_few_minority() {
        let mut rows: Vec<MixedRow> = (0..10).map(|i| row(vec![i as f64], vec![0], 0, i)).collect();
        rows.extend((0..3).map(|i| row(vec![i as f64], vec![0], 2, 10 + i)));
        let e = smotenc_balance(&rows, &ResamplePlan::default()).unwrap_err();
        assert!(matches!(e, Error::TooFewMinoritySamples { class: 2, count: 3, k: 5 }));
    }

    #[test]
    fn vote_tie_goes_to_seed() {
        let c = |v| Code::Level(v);
        assert_eq!(vote(c(9), [c(1), c(2)].into_iter()), c(9));
        assert_eq!(vote(c(9), [c(1), c(1), c(2)].into_iter()), c(1));
    }
}
