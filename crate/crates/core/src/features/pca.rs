use log::warn;
use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Principal axes of a training embedding matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// k × d, rows are unit-norm principal axes in decreasing variance order.
    pub components: Array2<f64>,
    /// Fraction of total variance carried by each retained axis.
    pub explained_variance_ratio: Vec<f64>,
}

/// Eigenvalues below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;

/// Eigendecomposition of the sample covariance. When fewer than `k`
/// eigenvalues are nonzero, `k` shrinks to the numerical rank with a
/// warning. Each axis is signed so its largest-magnitude entry is positive
/// (first such entry on ties).
pub fn fit_pca(x: &Array2<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(Error::InvalidConfig("PCA needs a non-empty matrix".into()));
    }
    let mean = x.mean_axis(Axis(0)).unwrap();
    let centered = x - &mean;
    let denom = (n.max(2) - 1) as f64;
    let cov = centered.t().dot(&centered) / denom;
    let cov_na = nalgebra::DMatrix::from_fn(d, d, |i, j| cov[[i, j]]);
    let eig = nalgebra::SymmetricEigen::new(cov_na);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order
        .iter()
        .take_while(|&&i| top > 0.0 && eig.eigenvalues[i] > RANK_TOL * top)
        .count();
    let kept = k.min(rank);
    if kept < k {
        warn!("PCA rank deficient: requested {k} components, keeping {kept}");
    }

    let mut components = Array2::zeros((kept, d));
    let mut ratio = Vec::with_capacity(kept);
    for (row, &i) in order.iter().take(kept).enumerate() {
        let v = eig.eigenvectors.column(i);
        let mut pivot = 0;
        for j in 1..d {
            if v[j].abs() > v[pivot].abs() {
                pivot = j;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[[row, j]] = sign * v[j];
        }
        ratio.push(if total > 0.0 { eig.eigenvalues[i].max(0.0) / total } else { 0.0 });
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio: ratio,
    })
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn total_explained(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    pub fn project(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        if v.len() != self.dim() {
            return Err(Error::WidthMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(self.components.dot(&(&v - &self.mean)))
    }

    /// Maps scores back to the input space.
    pub fn reconstruct(&self, scores: ArrayView1<f64>) -> Array1<f64> {
        self.components.t().dot(&scores) + &self.mean
    }
}
