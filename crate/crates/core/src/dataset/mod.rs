//! Cohort ingest: CSV loading, cleaning, de-duplication and imputation.

mod clean;
mod load;
pub mod schema;
pub mod surrogate;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use clean::{clean_and_dedupe, clean_text, dedupe, impute};
pub use load::{load_cohort, load_cohort_from_reader};
pub use schema::{FieldKind, Schema};

use crate::{Error, Result};

/// Three-level outcome. The discriminants are the class indices used by
/// every model and metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Graduate = 0,
    Dropout = 1,
    Enrolled = 2,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Graduate, Outcome::Dropout, Outcome::Enrolled];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "graduate" => Some(Outcome::Graduate),
            "dropout" | "drop-out" => Some(Outcome::Dropout),
            "enrolled" | "enrollee" => Some(Outcome::Enrolled),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Graduate => "Graduate",
            Outcome::Dropout => "Dropout",
            Outcome::Enrolled => "Enrolled",
        }
    }
}

/// Categorical cell. `Unknown` is the explicit imputed level; `Missing` only
/// exists before imputation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    Level(i64),
    Unknown,
    Missing,
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Code::Level(v) => s.serialize_i64(*v),
            Code::Unknown => s.serialize_str("unknown"),
            Code::Missing => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Null => Ok(Code::Missing),
            serde_json::Value::String(s) if s == "unknown" => Ok(Code::Unknown),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Code::Level)
                .ok_or_else(|| serde::de::Error::custom("non-integer code")),
            other => Err(serde::de::Error::custom(format!("bad code {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub text: String,
    /// Days between the comment and the census date.
    pub age_days: u32,
    /// Generator ground truth, present only on synthesized comments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<CommentProvenance>,
}

/// What the corpus generator intended a comment to express.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentProvenance {
    pub sentiment: crate::textpipe::Sentiment,
    pub theme: crate::textpipe::StressTag,
}

/// One learner row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub id: String,
    pub term: String,
    /// 29 integer-coded columns in [`schema::CATEGORICAL_FIELDS`] order.
    pub codes: Vec<Code>,
    /// 5 real columns in [`schema::NUMERIC_FIELDS`] order.
    pub numeric: Vec<Option<f64>>,
    /// Inflation rate and GDP, in [`schema::MACRO_FIELDS`] order.
    pub macro_indicators: Vec<Option<f64>>,
    pub label: Outcome,
    #[serde(default)]
    pub comments: Vec<Comment>,
    #[serde(default)]
    pub days_since_last_grade: Option<u32>,
    /// Set on rows produced by oversampling.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl StudentRecord {
    pub fn gdp(&self) -> Option<f64> {
        self.macro_indicators[1]
    }

    /// Age of the most recent comment, if any.
    pub fn comment_age(&self) -> Option<u32> {
        self.comments.iter().map(|c| c.age_days).min()
    }

    pub fn code(&self, field: &str) -> Option<Code> {
        schema::CATEGORICAL_FIELDS
            .iter()
            .position(|f| *f == field)
            .map(|i| self.codes[i])
    }

    pub fn numeric_value(&self, field: &str) -> Option<f64> {
        if let Some(i) = schema::NUMERIC_FIELDS.iter().position(|f| *f == field) {
            return self.numeric[i];
        }
        schema::MACRO_FIELDS
            .iter()
            .position(|f| *f == field)
            .and_then(|i| self.macro_indicators[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// 1-based line number in the source file.
    pub line: u64,
    pub id: Option<String>,
    pub term: Option<String>,
    /// Values in schema order.
    pub cells: Vec<Cell>,
    pub target: Outcome,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCohort {
    pub schema: Schema,
    pub rows: Vec<RawRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanCohort {
    pub rows: Vec<StudentRecord>,
    pub duplicates_removed: usize,
    pub missing_numeric_rate: f64,
    pub missing_categorical_rate: f64,
}

impl CleanCohort {
    pub fn new(rows: Vec<StudentRecord>) -> Self {
        let (num, cat) = missing_rates(&rows);
        Self {
            rows,
            duplicates_removed: 0,
            missing_numeric_rate: num,
            missing_categorical_rate: cat,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Counts per class in (Graduate, Dropout, Enrolled) order.
    pub fn class_histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for r in &self.rows {
            h[r.label.index()] += 1;
        }
        h
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label.index()).collect()
    }

    pub fn missing_cells(&self) -> usize {
        self.rows
            .iter()
            .map(|r| {
                r.codes.iter().filter(|c| **c == Code::Missing).count()
                    + r.numeric.iter().filter(|v| v.is_none()).count()
                    + r.macro_indicators.iter().filter(|v| v.is_none()).count()
            })
            .sum()
    }

    /// Writes the canonical line-JSON cohort file.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        for r in &self.rows {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let f = File::open(path)
            .map_err(|e| Error::CohortMissing(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            rows.push(serde_json::from_str(&line)?);
        }
        Ok(Self::new(rows))
    }
}

pub(crate) fn missing_rates(rows: &[StudentRecord]) -> (f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let mut num_missing = 0usize;
    let mut num_total = 0usize;
    let mut cat_missing = 0usize;
    let mut cat_total = 0usize;
    for r in rows {
        for v in r.numeric.iter().chain(&r.macro_indicators) {
            num_total += 1;
            num_missing += usize::from(v.is_none());
        }
        for c in &r.codes {
            cat_total += 1;
            cat_missing += usize::from(*c == Code::Missing);
        }
    }
    (
        num_missing as f64 / num_total as f64,
        cat_missing as f64 / cat_total as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_serde_roundtrip() {
        let codes = vec![Code::Level(17), Code::Unknown, Code::Missing];
        let s = serde_json::to_string(&codes).unwrap();
        assert_eq!(s, r#"[17,"unknown",null]"#);
        let back: Vec<Code> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, codes);
    }

    #[test]
    fn outcome_parsing() {
        assert_eq!(Outcome::parse("Dropout"), Some(Outcome::Dropout));
        assert_eq!(Outcome::parse(" graduate "), Some(Outcome::Graduate));
        assert_eq!(Outcome::parse("Enrolled"), Some(Outcome::Enrolled));
        assert_eq!(Outcome::parse("Withdrawn"), None);
    }
}
