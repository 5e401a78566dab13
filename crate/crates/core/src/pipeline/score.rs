use chrono::{DateTime, Utc};
use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::artifacts::DataDir;
use super::train::ModelArtifact;
use crate::augment::AugmentConfig;
use crate::dataset::{Code, StudentRecord};
use crate::explain::{
    compose_rationale, groups_from_slot_fields, shapley_attribution, Attribution, CitedPassage, Direction,
    InterventionPlan, ModalitySummary, Rationale, RationaleInputs, RiskFactor,
};
use crate::features::{analyze_student, build_text_vector, dense_raw, raw_field_names, FeatureModel, StudentText, PCA_DIM};
use crate::fusion::FusionTrace;
use crate::textpipe::TextPipeline;
use crate::Result;

/// One learner's scores and the inputs that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub student_id: String,
    pub probs: [f64; 3],
    pub text: StudentText,
    pub x_tab: Vec<f64>,
    pub x_txt: Vec<f64>,
    pub trace: Option<FusionTrace>,
}

impl Scored {
    /// Probability of Dropout.
    pub fn risk(&self) -> f64 {
        self.probs[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub scored: Scored,
    pub attribution: Attribution,
    pub rationale: Rationale,
    pub plan: InterventionPlan,
}

/// Text pipeline, fitted transforms and a trained model, ready to score
/// single learners end to end.
pub struct Scorer {
    pub text: TextPipeline,
    pub features: FeatureModel,
    pub model: ModelArtifact,
    pub augment: AugmentConfig,
}

fn row_view(v: &[f64]) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((1, v.len()), v).expect("1 x n view")
}

impl Scorer {
    pub fn new(mut text: TextPipeline, features: FeatureModel, model: ModelArtifact, augment: AugmentConfig) -> Self {
        text.use_retrieval = model.variant().uses_retrieval();
        Self {
            text,
            features,
            model,
            augment,
        }
    }

    /// Reference text pipeline plus the fitted transforms and `model_file`
    /// (an artifact name such as `triad`) from `dir`.
    pub fn load(dir: &DataDir, model_file: &str, augment: AugmentConfig) -> Result<Self> {
        let features = FeatureModel::read(&dir.features())?;
        let model = ModelArtifact::read(&dir.model(model_file))?;
        Ok(Self::new(TextPipeline::reference()?, features, model, augment))
    }

    fn use_stress(&self) -> bool {
        self.model.variant().uses_stress()
    }

    /// Embeds and retrieves for every comment, builds both feature blocks
    /// and runs the model.
    pub fn score(&self, row: &StudentRecord) -> Result<Scored> {
        let text = analyze_student(&self.text, row)?;
        let x_tab = self.features.encoder.encode(row)?;
        let x_txt = text.vector(&self.features.pca, self.use_stress())?;
        let (probs, trace) = match self.model.model.as_triad() {
            Some(m) => {
                let (p, t) = m.forward(&x_tab, &x_txt)?;
                ([p[0], p[1], p[2]], Some(t))
            }
            None => {
                let p = self.model.predict(row_view(&x_tab), row_view(&x_txt))?;
                ([p[[0, 0]], p[[0, 1]], p[[0, 2]]], None)
            }
        };
        Ok(Scored {
            student_id: row.id.clone(),
            probs,
            text,
            x_tab,
            x_txt,
            trace,
        })
    }

    /// Class probabilities for many learners, `batch` rows per forward pass.
    /// Memory is bounded by the batch, not the cohort.
    pub fn score_many(&self, rows: &[StudentRecord], batch: usize) -> Result<Vec<[f64; 3]>> {
        let mut out = Vec::with_capacity(rows.len());
        let (wt, wx) = (self.features.encoder.width(), crate::features::TEXT_WIDTH);
        for chunk in rows.chunks(batch.max(1)) {
            let mut tab = Vec::with_capacity(chunk.len() * wt);
            let mut txt = Vec::with_capacity(chunk.len() * wx);
            for r in chunk {
                tab.extend(self.features.encoder.encode(r)?);
                txt.extend(analyze_student(&self.text, r)?.vector(&self.features.pca, self.use_stress())?);
            }
            let xt = Array2::from_shape_vec((chunk.len(), wt), tab).expect("tab width");
            let xx = Array2::from_shape_vec((chunk.len(), wx), txt).expect("txt width");
            let p = self.model.predict(xt.view(), xx.view())?;
            out.extend(p.rows().into_iter().map(|r| [r[0], r[1], r[2]]));
        }
        Ok(out)
    }

    /// Index of the retrieved passage to cite and the fusion model's
    /// attention weight on it. With one token per modality the query and key
    /// maps receive no gradient, so passage-level attention is reported but
    /// the citation follows retrieval similarity.
    fn cite(&self, s: &Scored) -> Result<(Option<usize>, Option<f64>)> {
        let Some(q) = &s.text.quoted else {
            return Ok((None, None));
        };
        let hits = &q.retrieval.hits;
        if hits.is_empty() {
            return Ok((None, None));
        }
        let Some(m) = self.model.model.as_triad() else {
            return Ok((Some(0), None));
        };
        let mut cands = Vec::with_capacity(hits.len());
        for h in hits {
            let scores = self.features.pca.project(ArrayView1::from(&h.passage.embedding))?;
            let mut v = build_text_vector(scores.as_slice().unwrap(), s.text.affect.sentiment, s.text.affect.stress);
            if !self.use_stress() {
                v[PCA_DIM + 3..].fill(0.0);
            }
            cands.push(v);
        }
        let w = m.text_attention(&s.x_tab, &cands)?;
        Ok((Some(0), Some(w[0])))
    }

    fn factor(&self, row: &StudentRecord, attribution: &Attribution) -> Option<RiskFactor> {
        let top = attribution.top_increase()?;
        let j = attribution.features.iter().position(|f| f.name == top.name)?;
        let n_codes = row.codes.len();
        let (value, direction) = if j < n_codes {
            match row.codes[j] {
                Code::Level(v) => (v as f64, None),
                _ => return None,
            }
        } else {
            let k = j - n_codes;
            let v = dense_raw(row)[k]?;
            let dir = if v < self.features.encoder.mean[k] { Direction::Low } else { Direction::High };
            (v, Some(dir))
        };
        Some(RiskFactor {
            field: top.name.clone(),
            value,
            direction,
            phi: top.phi,
        })
    }

    /// Scores `row`, attributes its Dropout probability to the 38 raw
    /// tabular fields against `background`, and fills the alert template.
    pub fn explain(
        &self,
        row: &StudentRecord,
        background: ArrayView2<f64>,
        samples: usize,
        seed: u64,
        now: DateTime<Utc>,
    ) -> Result<Explanation> {
        let scored = self.score(row)?;
        let enc = &self.features.encoder;
        let names: Vec<String> = raw_field_names().iter().map(|s| s.to_string()).collect();
        let groups = groups_from_slot_fields(&enc.slot_fields(), names.len());
        let x_txt = &scored.x_txt;
        let model = &self.model;
        let f = |b: ArrayView2<f64>| -> Vec<f64> {
            let txt = Array2::from_shape_fn((b.nrows(), x_txt.len()), |(_, j)| x_txt[j]);
            model
                .predict(b, txt.view())
                .map(|p| p.column(1).to_vec())
                .unwrap_or_else(|_| vec![f64::NAN; b.nrows()])
        };
        let mut attribution = shapley_attribution(f, &scored.x_tab, background, &groups, &names, samples, seed)?;
        let (cited, weight) = self.cite(&scored)?;
        attribution.modality = Some(ModalitySummary {
            gate: scored.trace.as_ref().and_then(|t| t.gate),
            passage_attention: weight,
        });

        let affect = scored.text.affect;
        let plan = InterventionPlan::for_tag(affect.stress, now);
        let quoted = scored.text.quoted.as_ref();
        let passage = quoted
            .zip(cited)
            .map(|(q, i)| CitedPassage::from(&q.retrieval.hits[i].passage));
        let week = self.augment.week_of(quoted.map_or(0, |q| q.age_days));
        let rationale = compose_rationale(RationaleInputs {
            quote: quoted.map(|q| snippet(&q.text)),
            passage,
            sentiment: affect.sentiment,
            stress: affect.stress,
            risk: scored.risk(),
            week,
            factor: self.factor(row, &attribution),
            next_step: plan.describe(),
        });
        Ok(Explanation {
            scored,
            attribution,
            rationale,
            plan,
        })
    }
}

/// First sentence of a comment, for quoting.
pub fn snippet(text: &str) -> String {
    let end = text.find(['.', '?', '!']).unwrap_or(text.len());
    text[..end].trim().to_string()
}
