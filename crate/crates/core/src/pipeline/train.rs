use std::fmt;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::prepare::{analyze_cohort, prepare, Prepared};
use super::PipelineConfig;
use crate::bundle::Bundle;
use crate::dataset::CleanCohort;
use crate::eval::{
    discordant_counts, evaluate, mcnemar, AblationTable, BenchmarkTable, EvalReport, McNemar,
};
use crate::features::SplitPlan;
use crate::fusion::{balanced_alpha, train_triad, TriadModel, Variant, TRIAD_BUNDLE_KIND};
use crate::models::{
    predict_labels, train_logistic, train_mlp, Classifier, LogisticModel, MlpModel, LOGISTIC_BUNDLE_KIND,
    MLP_BUNDLE_KIND,
};
use crate::textpipe::TextPipeline;
use crate::{Error, Result};

/// What `train` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Logistic,
    /// Tabular MLP baseline.
    Mlp,
    /// Full fusion model.
    Triad,
    Variant(Variant),
}

impl ModelKind {
    /// Accepts `logistic`, `mlp`, `triad` and `variant:<name>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("variant:") {
            return Ok(ModelKind::Variant(Variant::parse(v)?));
        }
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "mlp" => Ok(ModelKind::Mlp),
            "triad" => Ok(ModelKind::Triad),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }

    /// Name used for the artifact file.
    pub fn file_name(self) -> String {
        match self {
            ModelKind::Variant(v) => format!("variant-{}", v.name()),
            other => other.to_string(),
        }
    }

    /// Data variant the model trains on.
    pub fn variant(self) -> Variant {
        match self {
            ModelKind::Logistic | ModelKind::Mlp => Variant::TabularOnly,
            ModelKind::Triad => Variant::Full,
            ModelKind::Variant(v) => v,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Logistic => f.write_str("logistic"),
            ModelKind::Mlp => f.write_str("mlp"),
            ModelKind::Triad => f.write_str("triad"),
            ModelKind::Variant(v) => write!(f, "variant:{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Logistic(LogisticModel),
    /// MLP over the tabular block (`text = false`) or the text block.
    Mlp { model: MlpModel, text: bool },
    Triad(Box<TriadModel>),
}

impl TrainedModel {
    pub fn predict(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>) -> Result<Array2<f64>> {
        match self {
            TrainedModel::Logistic(m) => m.predict_proba(x_tab),
            TrainedModel::Mlp { model, text: false } => model.predict_proba(x_tab),
            TrainedModel::Mlp { model, text: true } => model.predict_proba(x_txt),
            TrainedModel::Triad(m) => m.predict(x_tab, x_txt),
        }
    }

    pub fn as_triad(&self) -> Option<&TriadModel> {
        match self {
            TrainedModel::Triad(m) => Some(m),
            _ => None,
        }
    }
}

/// A trained model and the pipeline settings it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub kind: ModelKind,
    pub model: TrainedModel,
}

impl ModelArtifact {
    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn variant(&self) -> Variant {
        self.kind.variant()
    }

    pub fn predict(&self, x_tab: ArrayView2<f64>, x_txt: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.model.predict(x_tab, x_txt)
    }

    pub fn to_bundle(&self) -> Bundle {
        let (mut b, text) = match &self.model {
            TrainedModel::Logistic(m) => (m.to_bundle(), false),
            TrainedModel::Mlp { model, text } => (model.to_bundle(), *text),
            TrainedModel::Triad(m) => (m.to_bundle(), false),
        };
        b.meta["model_kind"] = serde_json::Value::String(self.kind.to_string());
        b.meta["text_branch"] = serde_json::Value::Bool(text);
        b
    }

    pub fn from_bundle(b: &Bundle) -> Result<Self> {
        let kind = ModelKind::parse(b.meta["model_kind"].as_str().unwrap_or(""))
            .map_err(|_| Error::BadBundle("model_kind missing or unknown".into()))?;
        let model = match b.kind.as_str() {
            LOGISTIC_BUNDLE_KIND => TrainedModel::Logistic(LogisticModel::from_bundle(b)?),
            MLP_BUNDLE_KIND => TrainedModel::Mlp {
                model: MlpModel::from_bundle(b)?,
                text: b.meta["text_branch"].as_bool().unwrap_or(false),
            },
            TRIAD_BUNDLE_KIND => TrainedModel::Triad(Box::new(TriadModel::from_bundle(b)?)),
            other => return Err(Error::BadBundle(format!("not a model bundle: {other}"))),
        };
        Ok(Self { kind, model })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_bundle().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bundle(&Bundle::read_model(path)?)
    }
}

/// Trains `kind` on the balanced training fold of `data`. The caller is
/// responsible for preparing `data` the way `kind.variant()` requires.
pub fn train_model(kind: ModelKind, data: &Prepared, cfg: &PipelineConfig) -> Result<ModelArtifact> {
    let tr = &data.train;
    let model = match kind {
        ModelKind::Logistic => TrainedModel::Logistic(train_logistic(tr.x_tab.view(), &tr.y, &cfg.logistic)?),
        ModelKind::Mlp | ModelKind::Variant(Variant::TabularOnly) => TrainedModel::Mlp {
            model: train_mlp(tr.x_tab.view(), &tr.y, &cfg.mlp)?,
            text: false,
        },
        ModelKind::Variant(Variant::TextOnly) => TrainedModel::Mlp {
            model: train_mlp(tr.x_txt.view(), &tr.y, &cfg.mlp)?,
            text: true,
        },
        ModelKind::Triad | ModelKind::Variant(_) => {
            let mut tc = kind.variant().triad_config(&cfg.triad);
            tc.alpha = cfg.focal_alpha.unwrap_or_else(|| balanced_alpha(data.train_histogram));
            TrainedModel::Triad(Box::new(train_triad(tr.x_tab.view(), tr.x_txt.view(), &tr.y, &tc)?))
        }
    };
    Ok(ModelArtifact { kind, model })
}

/// Trains and evaluates each model on one prepared split.
pub fn run_benchmark(data: &Prepared, kinds: &[ModelKind], cfg: &PipelineConfig) -> Result<(BenchmarkTable, Vec<ModelArtifact>)> {
    let mut table = BenchmarkTable::default();
    let mut models = Vec::new();
    for &k in kinds {
        let m = train_model(k, data, cfg)?;
        let p = m.predict(data.test.x_tab.view(), data.test.x_txt.view())?;
        table.rows.push(evaluate(&k.to_string(), &data.test.y, p.view(), &cfg.eval)?);
        models.push(m);
    }
    Ok((table, models))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRun {
    pub table: AblationTable,
    pub reports: Vec<EvalReport>,
    /// Full model against each variant; `None` without discordant rows.
    pub mcnemar: Vec<(String, Option<McNemar>)>,
}

/// Trains the full model and all five ablations on the same split and
/// compares them on the held-out fold.
pub fn run_ablation(cohort: &CleanCohort, split: &SplitPlan, tp: &mut TextPipeline, cfg: &PipelineConfig) -> Result<AblationRun> {
    let saved = tp.use_retrieval;
    tp.use_retrieval = true;
    let texts = analyze_cohort(tp, cohort);
    tp.use_retrieval = false;
    let texts_no_rag = analyze_cohort(tp, cohort);
    tp.use_retrieval = saved;
    let (texts, texts_no_rag) = (texts?, texts_no_rag?);

    let full_data = prepare(cohort, split, &texts, cfg, true)?;
    let mut arms: Vec<(String, Array2<f64>)> = Vec::new();
    let mut reports = Vec::new();
    let y = full_data.test.y.clone();
    for v in std::iter::once(Variant::Full).chain(Variant::ABLATIONS) {
        let data;
        let d = match v {
            Variant::NoRag => {
                data = prepare(cohort, split, &texts_no_rag, cfg, true)?;
                &data
            }
            Variant::NoStress => {
                data = prepare(cohort, split, &texts, cfg, false)?;
                &data
            }
            _ => &full_data,
        };
        log::info!("ablation: training {v}");
        let m = train_model(ModelKind::Variant(v), d, cfg)?;
        let p = m.predict(d.test.x_tab.view(), d.test.x_txt.view())?;
        reports.push(evaluate(v.name(), &y, p.view(), &cfg.eval)?);
        arms.push((v.name().to_string(), p));
    }
    let full_pred = predict_labels(&arms[0].1);
    let mut tests = Vec::new();
    for (name, p) in &arms[1..] {
        let (b, c) = discordant_counts(&y, &predict_labels(p), &full_pred)?;
        tests.push((name.clone(), mcnemar(b, c).ok()));
    }
    Ok(AblationRun {
        table: AblationTable::build(&y, &arms, &cfg.eval)?,
        reports,
        mcnemar: tests,
    })
}
