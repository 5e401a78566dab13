use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::pca::PcaModel;
use crate::dataset::StudentRecord;
use crate::textpipe::{AffectLabels, RetrievalResult, Sentiment, StressTag, TextPipeline, EMBEDDING_DIM};
use crate::Result;

pub const PCA_DIM: usize = 50;
/// 50 PCA scores, 3 sentiment bits, 4 stress bits.
pub const TEXT_WIDTH: usize = PCA_DIM + 3 + 4;
/// Decay constant (days) of the recency weight `exp(-age / tau)`.
pub const RECENCY_TAU_DAYS: f64 = 30.0;

/// Text-branch vector. Scores beyond the fitted PCA rank stay zero.
pub fn build_text_vector(pca_scores: &[f64], sentiment: Sentiment, stress: StressTag) -> Vec<f64> {
    let mut v = vec![0.0; TEXT_WIDTH];
    for (o, s) in v.iter_mut().zip(pca_scores.iter().take(PCA_DIM)) {
        *o = *s;
    }
    v[PCA_DIM + sentiment.index()] = 1.0;
    v[PCA_DIM + 3 + stress.index()] = 1.0;
    v
}

/// Canonical vector of a student with no comments.
pub fn silent_text_vector() -> Vec<f64> {
    build_text_vector(&[], Sentiment::Neutral, StressTag::None)
}

pub fn text_slot_names() -> Vec<String> {
    let mut names: Vec<String> = (0..PCA_DIM).map(|i| format!("pca_{i}")).collect();
    names.extend(Sentiment::ALL.iter().map(|s| format!("sentiment={}", s.name())));
    names.extend(StressTag::ALL.iter().map(|s| format!("stress={}", s.name())));
    names
}

/// The comment chosen to represent a student in rationales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotedComment {
    pub text: String,
    pub age_days: u32,
    pub affect: AffectLabels,
    pub retrieval: RetrievalResult,
}

/// Recency-weighted summary of a student's comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentText {
    /// Weighted mean of comment embeddings; all zeros for silent students.
    pub embedding: Vec<f64>,
    pub affect: AffectLabels,
    pub quoted: Option<QuotedComment>,
}

impl StudentText {
    pub fn silent() -> Self {
        Self {
            embedding: vec![0.0; EMBEDDING_DIM],
            affect: AffectLabels::silent(),
            quoted: None,
        }
    }

    pub fn is_silent(&self) -> bool {
        self.quoted.is_none()
    }

    /// PCA scores of the pooled embedding (zeros when silent), then the
    /// affect one-hots. `use_stress = false` zeroes the stress block.
    pub fn vector(&self, pca: &PcaModel, use_stress: bool) -> Result<Vec<f64>> {
        let mut v = if self.is_silent() {
            silent_text_vector()
        } else {
            let scores = pca.project(ArrayView1::from(&self.embedding))?;
            build_text_vector(scores.as_slice().unwrap(), self.affect.sentiment, self.affect.stress)
        };
        if !use_stress {
            v[PCA_DIM + 3..].fill(0.0);
        }
        Ok(v)
    }
}

/// Analyzes every comment and pools them with weights `exp(-age / 30)`.
/// The quoted comment is the most recent one whose own stress tag matches
/// the pooled tag, else the most recent comment.
pub fn analyze_student(tp: &TextPipeline, row: &StudentRecord) -> Result<StudentText> {
    let mut analyses = Vec::new();
    for c in &row.comments {
        let a = tp.analyze(&c.text)?;
        if a.embedding.iter().all(|v| *v == 0.0) {
            continue;
        }
        analyses.push((c, a));
    }
    if analyses.is_empty() {
        return Ok(StudentText::silent());
    }
    let mut emb = vec![0.0; EMBEDDING_DIM];
    let mut sent = [0.0; 3];
    let mut stress = [0.0; 4];
    let mut total = 0.0;
    for (c, a) in &analyses {
        let w = (-f64::from(c.age_days) / RECENCY_TAU_DAYS).exp();
        total += w;
        for (e, x) in emb.iter_mut().zip(&a.embedding) {
            *e += w * x;
        }
        for (s, p) in sent.iter_mut().zip(a.affect.sentiment_probs) {
            *s += w * p;
        }
        for (s, p) in stress.iter_mut().zip(a.affect.stress_probs) {
            *s += w * p;
        }
    }
    emb.iter_mut().for_each(|e| *e /= total);
    let affect = AffectLabels::from_probs(sent.map(|s| s / total), stress.map(|s| s / total));

    let newest = |pred: &dyn Fn(&AffectLabels) -> bool| {
        analyses
            .iter()
            .filter(|(_, a)| pred(&a.affect))
            .min_by_key(|(c, _)| c.age_days)
    };
    let (c, a) = newest(&|l| l.stress == affect.stress)
        .or_else(|| newest(&|_| true))
        .unwrap();
    Ok(StudentText {
        embedding: emb,
        affect,
        quoted: Some(QuotedComment {
            text: c.text.clone(),
            age_days: c.age_days,
            affect: a.affect,
            retrieval: a.retrieval.clone(),
        }),
    })
}
