use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::sub_rng;
use crate::{Error, Result};

const STREAM_PERMUTATION: u64 = 0x5AA9;
const STREAM_BACKGROUND: u64 = 0xB6;

pub const DEFAULT_SHAPLEY_SAMPLES: usize = 1000;

/// Attention and gate readings for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalitySummary {
    pub gate: Option<f64>,
    /// Head-averaged weight on the cited passage.
    pub passage_attention: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContribution {
    pub name: String,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub features: Vec<FeatureContribution>,
    /// Model output at the explained point.
    pub prediction: f64,
    /// Mean model output over the full background.
    pub base_value: f64,
    /// `|Σφ − (prediction − base_value)|`.
    pub additivity_gap: f64,
    pub samples: usize,
    pub background_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<ModalitySummary>,
}

impl Attribution {
    /// Feature pushing the output up the most, if any pushes it up at all.
    pub fn top_increase(&self) -> Option<&FeatureContribution> {
        self.features
            .iter()
            .filter(|f| f.phi > 0.0)
            .max_by(|a, b| a.phi.total_cmp(&b.phi))
    }

    /// Features sorted by |φ| descending, ties by name.
    pub fn ranked(&self) -> Vec<&FeatureContribution> {
        let mut v: Vec<&FeatureContribution> = self.features.iter().collect();
        v.sort_by(|a, b| b.phi.abs().total_cmp(&a.phi.abs()).then_with(|| a.name.cmp(&b.name)));
        v
    }
}

/// Monte-Carlo permutation Shapley values for `f` at `x`.
///
/// Each sample draws a permutation of the feature groups and a background
/// row, then walks from the background row to `x` one group at a time; the
/// change in `f` at each step is credited to the group that switched.
/// `groups[g]` lists the columns of group `g`; columns outside every group
/// stay at `x`. `f` maps a batch of rows to one output per row.
pub fn shapley_attribution<F>(
    f: F,
    x: &[f64],
    background: ArrayView2<f64>,
    groups: &[Vec<usize>],
    names: &[String],
    samples: usize,
    seed: u64,
) -> Result<Attribution>
where
    F: Fn(ArrayView2<f64>) -> Vec<f64>,
{
    if background.nrows() == 0 {
        return Err(Error::EmptyBackground);
    }
    if background.ncols() != x.len() {
        return Err(Error::WidthMismatch {
            expected: x.len(),
            got: background.ncols(),
        });
    }
    if names.len() != groups.len() {
        return Err(Error::LengthMismatch(names.len(), groups.len()));
    }
    if samples == 0 {
        return Err(Error::InvalidReps);
    }
    let g = groups.len();
    let mut phi = vec![0.0; g];
    let mut order: Vec<usize> = (0..g).collect();
    let mut batch = Array2::<f64>::zeros((g + 1, x.len()));
    for s in 0..samples {
        let mut r = sub_rng(seed, STREAM_PERMUTATION, s as u64);
        order.sort_unstable();
        order.shuffle(&mut r);
        let b = r.random_range(0..background.nrows());
        let mut row = background.row(b).to_owned();
        for c in ungrouped(groups, x.len()) {
            row[c] = x[c];
        }
        batch.row_mut(0).assign(&row);
        for (step, &grp) in order.iter().enumerate() {
            for &c in &groups[grp] {
                row[c] = x[c];
            }
            batch.row_mut(step + 1).assign(&row);
        }
        let out = f(batch.view());
        for (step, &grp) in order.iter().enumerate() {
            phi[grp] += out[step + 1] - out[step];
        }
    }
    phi.iter_mut().for_each(|p| *p /= samples as f64);

    let x_row = ArrayView2::from_shape((1, x.len()), x).unwrap();
    let prediction = f(x_row)[0];
    let bg_out = f(background);
    let base_value = bg_out.iter().sum::<f64>() / bg_out.len() as f64;
    let additivity_gap = (phi.iter().sum::<f64>() - (prediction - base_value)).abs();
    Ok(Attribution {
        features: names
            .iter()
            .zip(phi)
            .map(|(n, p)| FeatureContribution { name: n.clone(), phi: p })
            .collect(),
        prediction,
        base_value,
        additivity_gap,
        samples,
        background_size: background.nrows(),
        modality: None,
    })
}

fn ungrouped(groups: &[Vec<usize>], width: usize) -> Vec<usize> {
    let mut used = vec![false; width];
    for c in groups.iter().flatten() {
        used[*c] = true;
    }
    (0..width).filter(|c| !used[*c]).collect()
}

/// Groups columns by the raw field each one came from.
pub fn groups_from_slot_fields(slot_fields: &[usize], n_fields: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n_fields];
    for (col, &f) in slot_fields.iter().enumerate() {
        groups[f].push(col);
    }
    groups
}

/// Up to `size` row indices drawn per class in proportion to its share of
/// `y` (at least one per present class), returned sorted.
pub fn stratified_background(y: &[usize], size: usize, seed: u64) -> Vec<usize> {
    let n = y.len();
    if n <= size {
        return (0..n).collect();
    }
    let mut out = Vec::with_capacity(size);
    for c in 0..3 {
        let mut rows: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
        if rows.is_empty() {
            continue;
        }
        let take = ((rows.len() as f64 * size as f64 / n as f64).round() as usize).clamp(1, rows.len());
        rows.shuffle(&mut sub_rng(seed, STREAM_BACKGROUND, c as u64));
        out.extend_from_slice(&rows[..take]);
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn singletons(d: usize) -> (Vec<Vec<usize>>, Vec<String>) {
        ((0..d).map(|i| vec![i]).collect(), (0..d).map(|i| format!("f{i}")).collect())
    }

    #[test]
    fn constant_model_has_zero_attribution() {
        let bg = Array2::from_shape_fn((10, 3), |(i, j)| (i * j) as f64);
        let (g, n) = singletons(3);
        let a = shapley_attribution(|b| vec![0.7; b.nrows()], &[1.0, 2.0, 3.0], bg.view(), &g, &n, 50, 1).unwrap();
        assert!(a.features.iter().all(|f| f.phi == 0.0));
        assert!(a.additivity_gap < 1e-12);
    }

    #[test]
    fn empty_background() {
        let (g, n) = singletons(2);
        let bg = Array2::<f64>::zeros((0, 2));
        assert!(matches!(
            shapley_attribution(|b| vec![0.0; b.nrows()], &[0.0, 0.0], bg.view(), &g, &n, 5, 0),
            Err(Error::EmptyBackground)
        ));
    }

    #[test]
    fn stratified_background_keeps_proportions() {
        let y: Vec<usize> = (0..300).map(|i| if i < 150 { 0 } else if i < 250 { 1 } else { 2 }).collect();
        let idx = stratified_background(&y, 30, 4);
        let counts = [0, 1, 2].map(|c| idx.iter().filter(|&&i| y[i] == c).count());
        assert_eq!(counts, [15, 10, 5]);
    }
}
