//! Baseline classifiers: multinomial logistic regression and the tabular MLP.

mod logistic;
mod mlp;

use ndarray::{Array2, ArrayView2};

pub use logistic::{train_logistic, LogisticConfig, LogisticModel, LOGISTIC_BUNDLE_KIND};
pub use mlp::{train_mlp, MlpConfig, MlpModel, MLP_BUNDLE_KIND};

use crate::{Error, Result};

/// Anything that maps a feature matrix to n × 3 class probabilities.
pub trait Classifier: Send + Sync {
    fn input_width(&self) -> usize;
    fn predict_proba_unchecked(&self, x: ArrayView2<f64>) -> Array2<f64>;

    fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                got: x.ncols(),
            });
        }
        Ok(self.predict_proba_unchecked(x))
    }
}

/// Row-wise argmax, ties to the lowest class index.
pub fn predict_labels(p: &Array2<f64>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|r| crate::util::argmax(r.as_slice().unwrap_or(&r.to_vec())))
        .collect()
}

pub(crate) fn check_labels(x: ArrayView2<f64>, y: &[usize]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch(x.nrows(), y.len()));
    }
    if let Some(bad) = y.iter().find(|c| **c > 2) {
        return Err(Error::InvalidConfig(format!("label {bad} outside 0..=2")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite feature value".into()));
    }
    Ok(())
}
