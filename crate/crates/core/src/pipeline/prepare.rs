use std::path::Path;

use ndarray::{s, Array2};

use super::PipelineConfig;
use crate::dataset::{clean_and_dedupe, impute, load_cohort, CleanCohort, Schema};
use crate::explain::stratified_background;
use crate::features::{FeatureModel, SplitPlan, StudentText, PCA_DIM, TEXT_WIDTH};
use crate::fusion::Variant;
use crate::resample::{smotenc_balance, MixedRow};
use crate::textpipe::TextPipeline;
use crate::Result;

/// `load_cohort` → `clean_and_dedupe` → `impute` on the UCI schema.
pub fn load_clean(path: &Path) -> Result<CleanCohort> {
    impute(clean_and_dedupe(load_cohort(path, &Schema::uci())?))
}

/// Text branch summary of every row, in cohort order.
pub fn analyze_cohort(tp: &TextPipeline, cohort: &CleanCohort) -> Result<Vec<StudentText>> {
    cohort.rows.iter().map(|r| crate::features::analyze_student(tp, r)).collect()
}

/// Model inputs for one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub x_tab: Array2<f64>,
    pub x_txt: Array2<f64>,
    pub y: Vec<usize>,
    /// Cohort row of each input row; for synthetic rows, the seed row.
    pub source: Vec<usize>,
    pub synthetic: Vec<bool>,
}

impl Fold {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for &c in &self.y {
            h[c] += 1;
        }
        h
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub features: FeatureModel,
    /// Training fold after SMOTENC balancing.
    pub train: Fold,
    pub test: Fold,
    /// Training class counts before balancing.
    pub train_histogram: [usize; 3],
    /// Encoded stratified sample of the original training rows.
    pub background: Array2<f64>,
}

fn stack(rows: Vec<Vec<f64>>, width: usize) -> Array2<f64> {
    let n = rows.len();
    Array2::from_shape_vec((n, width), rows.into_iter().flatten().collect()).expect("row widths")
}

/// Fits the feature transforms on the training rows, encodes both folds and
/// balances the training fold with SMOTENC. Text vectors ride along with
/// the oversampler: PCA scores are interpolated with the tabular step and
/// the affect one-hots are copied from the seed row, and neither enters the
/// neighbour distance. `use_stress = false` zeroes the stress block.
pub fn prepare(
    cohort: &CleanCohort,
    split: &SplitPlan,
    texts: &[StudentText],
    cfg: &PipelineConfig,
    use_stress: bool,
) -> Result<Prepared> {
    let train_rows: Vec<_> = split.train.iter().map(|&i| cohort.rows[i].clone()).collect();
    let train_texts: Vec<_> = split.train.iter().map(|&i| texts[i].clone()).collect();
    let features = FeatureModel::fit(&train_rows, &train_texts)?;
    let enc = &features.encoder;

    let mut mixed = Vec::with_capacity(split.train.len());
    for &i in &split.train {
        let row = &cohort.rows[i];
        let t = texts[i].vector(&features.pca, use_stress)?;
        mixed.push(MixedRow {
            dense: enc.dense_z(row),
            codes: row.codes.clone(),
            label: row.label.index(),
            source: i,
            synthetic: false,
            aux_interp: t[..PCA_DIM].to_vec(),
            aux_copy: t[PCA_DIM..].to_vec(),
        });
    }
    let balanced = smotenc_balance(&mixed, &cfg.resample)?;
    let mut tab = Vec::with_capacity(balanced.len());
    let mut txt = Vec::with_capacity(balanced.len());
    for r in &balanced {
        tab.push(enc.encode_parts(&r.codes, &r.dense)?);
        txt.push(r.aux_interp.iter().chain(&r.aux_copy).copied().collect::<Vec<f64>>());
    }
    let train = Fold {
        x_tab: stack(tab, enc.width()),
        x_txt: stack(txt, TEXT_WIDTH),
        y: balanced.iter().map(|r| r.label).collect(),
        source: balanced.iter().map(|r| r.source).collect(),
        synthetic: balanced.iter().map(|r| r.synthetic).collect(),
    };

    let mut tab = Vec::with_capacity(split.test.len());
    let mut txt = Vec::with_capacity(split.test.len());
    for &i in &split.test {
        tab.push(enc.encode(&cohort.rows[i])?);
        txt.push(texts[i].vector(&features.pca, use_stress)?);
    }
    let test = Fold {
        x_tab: stack(tab, enc.width()),
        x_txt: stack(txt, TEXT_WIDTH),
        y: split.test.iter().map(|&i| cohort.rows[i].label.index()).collect(),
        source: split.test.clone(),
        synthetic: vec![false; split.test.len()],
    };

    let n_orig = split.train.len();
    let y_orig = &train.y[..n_orig];
    let bg = stratified_background(y_orig, cfg.background_size, cfg.seed);
    let background = train.x_tab.slice(s![..n_orig, ..]).select(ndarray::Axis(0), &bg);
    Ok(Prepared {
        features,
        train,
        test,
        train_histogram: split.train_histogram,
        background,
    })
}

/// Analyzes the cohort's comments the way `variant` sees them (with or
/// without retrieval) and prepares the split for it.
pub fn prepare_variant(
    cohort: &CleanCohort,
    split: &SplitPlan,
    tp: &mut TextPipeline,
    variant: Variant,
    cfg: &PipelineConfig,
) -> Result<Prepared> {
    let saved = tp.use_retrieval;
    tp.use_retrieval = variant.uses_retrieval();
    let texts = analyze_cohort(tp, cohort);
    tp.use_retrieval = saved;
    prepare(cohort, split, &texts?, cfg, variant.uses_stress())
}
