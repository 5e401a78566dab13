use serde::{Deserialize, Serialize};

use crate::dataset::schema::{CATEGORICAL_FIELDS, MACRO_FIELDS, NUMERIC_FIELDS};
use crate::dataset::{Code, StudentRecord};
use crate::{Error, Result};

/// Dense slots after the one-hot block: 5 numerics, 2 macro indicators,
/// days since last grade and comment age.
pub const DENSE_FIELDS: [&str; 9] = [
    NUMERIC_FIELDS[0],
    NUMERIC_FIELDS[1],
    NUMERIC_FIELDS[2],
    NUMERIC_FIELDS[3],
    NUMERIC_FIELDS[4],
    MACRO_FIELDS[0],
    MACRO_FIELDS[1],
    "days_since_last_grade",
    "comment_age",
];

/// Raw (unscaled) dense values of a row. Missing recency fields fall back to
/// `None` and are encoded at the training mean.
pub fn dense_raw(row: &StudentRecord) -> [Option<f64>; 9] {
    let mut out = [None; 9];
    for (o, v) in out.iter_mut().zip(row.numeric.iter().chain(&row.macro_indicators)) {
        *o = *v;
    }
    out[7] = row.days_since_last_grade.map(f64::from);
    out[8] = row.comment_age().map(f64::from);
    out
}

/// One-hot maps for the 29 code columns plus z-score parameters for the
/// dense block. Each column's map lists the observed levels in ascending
/// order followed by a trailing `unknown` slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularEncoder {
    pub levels: Vec<Vec<i64>>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl TabularEncoder {
    pub fn fit(train: &[StudentRecord]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::UnfittedEncoder);
        }
        let mut levels = vec![Vec::new(); CATEGORICAL_FIELDS.len()];
        for r in train {
            for (col, code) in r.codes.iter().enumerate() {
                if let Code::Level(v) = code {
                    levels[col].push(*v);
                }
            }
        }
        for l in &mut levels {
            l.sort_unstable();
            l.dedup();
        }
        let mut mean = vec![0.0; DENSE_FIELDS.len()];
        let mut sd = vec![1.0; DENSE_FIELDS.len()];
        for j in 0..DENSE_FIELDS.len() {
            let vals: Vec<f64> = train.iter().filter_map(|r| dense_raw(r)[j]).collect();
            if vals.is_empty() {
                continue;
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64;
            mean[j] = m;
            if var > 0.0 {
                sd[j] = var.sqrt();
            }
        }
        Ok(Self { levels, mean, sd })
    }

    /// Σ (levels + 1) + 9.
    pub fn width(&self) -> usize {
        self.onehot_width() + DENSE_FIELDS.len()
    }

    pub fn onehot_width(&self) -> usize {
        self.levels.iter().map(|l| l.len() + 1).sum()
    }

    /// Offset of each column's first one-hot slot.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.levels
            .iter()
            .map(|l| {
                let o = acc;
                acc += l.len() + 1;
                o
            })
            .collect()
    }

    /// z-scored dense block; missing values map to 0.
    pub fn dense_z(&self, row: &StudentRecord) -> Vec<f64> {
        dense_raw(row)
            .iter()
            .enumerate()
            .map(|(j, v)| v.map_or(0.0, |v| (v - self.mean[j]) / self.sd[j]))
            .collect()
    }

    /// One-hot block followed by an already-scaled dense block.
    pub fn encode_parts(&self, codes: &[Code], dense_z: &[f64]) -> Result<Vec<f64>> {
        if codes.len() != self.levels.len() {
            return Err(Error::WidthMismatch {
                expected: self.levels.len(),
                got: codes.len(),
            });
        }
        if dense_z.len() != DENSE_FIELDS.len() {
            return Err(Error::WidthMismatch {
                expected: DENSE_FIELDS.len(),
                got: dense_z.len(),
            });
        }
        let mut out = vec![0.0; self.width()];
        let mut offset = 0;
        for (code, lv) in codes.iter().zip(&self.levels) {
            let slot = match code {
                Code::Level(v) => lv.binary_search(v).unwrap_or(lv.len()),
                _ => lv.len(),
            };
            out[offset + slot] = 1.0;
            offset += lv.len() + 1;
        }
        out[offset..].copy_from_slice(dense_z);
        Ok(out)
    }

    pub fn encode(&self, row: &StudentRecord) -> Result<Vec<f64>> {
        self.encode_parts(&row.codes, &self.dense_z(row))
    }

    /// Human-readable name of every output slot.
    pub fn slot_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for (field, lv) in CATEGORICAL_FIELDS.iter().zip(&self.levels) {
            names.extend(lv.iter().map(|v| format!("{field}={v}")));
            names.push(format!("{field}=unknown"));
        }
        names.extend(DENSE_FIELDS.iter().map(|f| format!("{f}(z)")));
        names
    }

    /// Raw field that produced each output slot, as an index into
    /// `CATEGORICAL_FIELDS ++ DENSE_FIELDS` (38 fields).
    pub fn slot_fields(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.width());
        for (col, lv) in self.levels.iter().enumerate() {
            out.extend(std::iter::repeat_n(col, lv.len() + 1));
        }
        out.extend((0..DENSE_FIELDS.len()).map(|j| CATEGORICAL_FIELDS.len() + j));
        out
    }
}

/// Names of the 38 raw tabular fields in slot-field order.
pub fn raw_field_names() -> Vec<&'static str> {
    CATEGORICAL_FIELDS.iter().chain(DENSE_FIELDS.iter()).copied().collect()
}

/// Encoder that has not been fitted; every encode call fails.
#[derive(Debug, Clone, Default)]
pub struct EncoderSlot(Option<TabularEncoder>);

impl EncoderSlot {
    pub fn fitted(enc: TabularEncoder) -> Self {
        Self(Some(enc))
    }

    pub fn get(&self) -> Result<&TabularEncoder> {
        self.0.as_ref().ok_or(Error::UnfittedEncoder)
    }
}
