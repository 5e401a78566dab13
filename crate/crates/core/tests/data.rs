use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triad_core::augment::{augment, corpus_stats, AugmentConfig};
use triad_core::dataset::surrogate::{generate_csv, surrogate_cohort, SurrogateConfig};
use triad_core::dataset::{clean_and_dedupe, dedupe, impute, load_cohort_from_reader, Code, Schema};
use triad_core::features::{dense_raw, fit_pca, stratified_split, TabularEncoder};
use triad_core::fusion::Variant;
use triad_core::pipeline::{prepare_variant, PipelineConfig};
use triad_core::resample::{smotenc_balance, MixedRow, ResamplePlan};
use triad_core::textpipe::{LexiconClassifier, StressTag, TextPipeline};

fn raw_with_gaps(seed: u64) -> triad_core::dataset::RawCohort {
    let cfg = SurrogateConfig {
        seed,
        class_counts: [300, 200, 100],
        missing_numeric_rate: 0.05,
        missing_categorical_rate: 0.08,
        ..Default::default()
    };
    load_cohort_from_reader(generate_csv(&cfg).as_bytes(), &Schema::uci()).unwrap()
}

#[test]
fn full_cohort_shape_split_and_balance() {
    let cohort = surrogate_cohort(&SurrogateConfig::default()).unwrap();
    assert_eq!(cohort.len(), 4423);
    assert_eq!(Schema::uci().len(), 36);
    let mut hist = [0usize; 3];
    for r in &cohort.rows {
        hist[r.label.index()] += 1;
    }
    assert_eq!(hist, [2208, 1421, 794]);

    let cfg = PipelineConfig::default();
    let split = stratified_split(&cohort, 0.2, cfg.seed).unwrap();
    assert_eq!(split.test_histogram, [442, 284, 159]);
    let train: HashSet<usize> = split.train.iter().copied().collect();
    assert!(split.test.iter().all(|i| !train.contains(i)));
    assert_eq!(train.len() + split.test.len(), cohort.len());

    let cohort = augment(cohort, &AugmentConfig::default()).unwrap();
    let mut tp = TextPipeline::reference().unwrap();
    let data = prepare_variant(&cohort, &split, &mut tp, Variant::Full, &cfg).unwrap();
    assert_eq!(data.train.histogram(), [1766, 1766, 1766]);
    assert_eq!(data.train.len(), 5298);
    // Test rows never seed or appear among training rows.
    let test: HashSet<usize> = split.test.iter().copied().collect();
    assert!(data.train.source.iter().all(|s| !test.contains(s)));
    assert_eq!(data.test.source, split.test);
    assert!(data.test.synthetic.iter().all(|s| !s));

    let again = prepare_variant(&cohort, &split, &mut tp, Variant::Full, &cfg).unwrap();
    assert_eq!(again.train, data.train);
}

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[test]
fn cleaning_conserves_rows_and_is_idempotent() {
    let mut raw = raw_with_gaps(3);
    for (i, r) in raw.rows.iter_mut().enumerate() {
        r.id = Some(format!("student-{}", i % 550));
    }
    let n_raw = raw.rows.len();
    let clean = clean_and_dedupe(raw);
    assert_eq!(clean.len() + clean.duplicates_removed, n_raw);
    assert_eq!(clean.duplicates_removed, 50);
    let again = dedupe(clean.clone());
    assert_eq!(again.rows, clean.rows);

    let imputed = impute(clean.clone()).unwrap();
    assert_eq!(imputed.missing_cells(), 0);
    assert_eq!(impute(imputed.clone()).unwrap().rows, imputed.rows);

    // Median imputation keeps each numeric column inside its observed range.
    let n_num = clean.rows[0].numeric.len();
    for j in 0..n_num {
        let observed: Vec<f64> = clean.rows.iter().filter_map(|r| r.numeric[j]).collect();
        let after: Vec<f64> = imputed.rows.iter().map(|r| r.numeric[j].unwrap()).collect();
        assert_eq!(range(&observed), range(&after), "column {j}");
    }
}

#[test]
fn encoder_is_fitted_on_training_rows_only() {
    let cohort = augment(impute(clean_and_dedupe(raw_with_gaps(4))).unwrap(), &AugmentConfig::default()).unwrap();
    let split = stratified_split(&cohort, 0.2, 0).unwrap();
    let train: Vec<_> = split.train.iter().map(|&i| cohort.rows[i].clone()).collect();
    let enc = TabularEncoder::fit(&train).unwrap();
    let z: Vec<Vec<f64>> = train.iter().map(|r| enc.dense_z(r)).collect();
    for j in 0..z[0].len() {
        let n = z.len() as f64;
        let m = z.iter().map(|r| r[j]).sum::<f64>() / n;
        let sd = (z.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n).sqrt();
        assert!(m.abs() < 1e-9, "column {j} mean {m}");
        assert!((sd - 1.0).abs() < 1e-6, "column {j} sd {sd}");
    }
    // Every imputed row encodes, including test rows with unseen levels.
    for r in &cohort.rows {
        assert_eq!(enc.encode(r).unwrap().len(), enc.width());
    }
    // Refitting on train + test gives a different encoder.
    let all = TabularEncoder::fit(&cohort.rows).unwrap();
    assert_ne!(all.mean, enc.mean);
    assert!(dense_raw(&cohort.rows[0]).iter().all(Option::is_some));
}

#[test]
fn corpus_matches_published_composition() {
    let cohort = augment(surrogate_cohort(&SurrogateConfig::default()).unwrap(), &AugmentConfig::default()).unwrap();
    let s = corpus_stats(&cohort);
    assert_eq!(s.n_comments, 22_115);
    assert!((s.mean_words - 42.0).abs() <= 5.0, "{}", s.mean_words);
    for (got, want) in s.sentiment_mix.iter().zip([0.38, 0.42, 0.20]) {
        assert!((got - want).abs() <= 0.03, "{:?}", s.sentiment_mix);
    }
    // Themed comments carry a marker the lexicon tagger recognises.
    let lex = LexiconClassifier::default();
    for tag in [StressTag::Isolation, StressTag::Workload, StressTag::Confusion] {
        let themed: Vec<&str> = cohort
            .rows
            .iter()
            .flat_map(|r| &r.comments)
            .filter(|c| c.provenance.is_some_and(|p| p.theme == tag))
            .map(|c| c.text.as_str())
            .collect();
        assert!(!themed.is_empty());
        let marked = themed.iter().filter(|t| lex.stress_evidence(t)[tag.index()] > 0.0).count();
        assert!(marked as f64 >= 0.95 * themed.len() as f64, "{tag:?}: {marked}/{}", themed.len());
    }
    // Seeded: same config, same corpus.
    let again = augment(surrogate_cohort(&SurrogateConfig::default()).unwrap(), &AugmentConfig::default()).unwrap();
    assert_eq!(again.rows, cohort.rows);
}

#[test]
fn pca_signs_are_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = ndarray::Array2::from_shape_simple_fn((40, 6), || rng.random_range(-1.0..1.0));
    let m = fit_pca(&x, 4).unwrap();
    for row in m.components.rows() {
        let pivot = row.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        assert!(pivot > 0.0);
        assert!((row.dot(&row) - 1.0).abs() < 1e-9);
    }
}

fn mixed_rows(seed: u64, counts: [usize; 3], dims: usize, cats: usize) -> Vec<MixedRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (label, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let source = out.len();
            out.push(MixedRow {
                dense: (0..dims).map(|_| rng.random_range(-2.0..2.0) + label as f64).collect(),
                codes: (0..cats).map(|_| Code::Level(rng.random_range(0..3))).collect(),
                label,
                source,
                synthetic: false,
                aux_interp: vec![rng.random_range(-1.0..1.0)],
                aux_copy: vec![label as f64],
            });
        }
    }
    out
}

/// Step `t` with `synthetic = seed + t (other - seed)` on every coordinate,
/// if one exists.
fn segment_step(seed: &[f64], other: &[f64], synth: &[f64]) -> Option<f64> {
    let mut t: Option<f64> = None;
    for ((a, b), s) in seed.iter().zip(other).zip(synth) {
        let d = b - a;
        if d.abs() < 1e-12 {
            if (s - a).abs() > 1e-9 {
                return None;
            }
            continue;
        }
        let ti = (s - a) / d;
        match t {
            Some(t0) if (t0 - ti).abs() > 1e-9 => return None,
            None => t = Some(ti),
            _ => {}
        }
    }
    Some(t.unwrap_or(0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn smotenc_invariants(
        seed in any::<u64>(),
        counts in (20usize..40, 7usize..20, 6usize..15),
        dims in 1usize..5,
        cats in 0usize..4,
        k in 1usize..6,
    ) {
        let rows = mixed_rows(seed, [counts.0, counts.1, counts.2], dims, cats);
        let plan = ResamplePlan { k_neighbors: k, target: None, seed };
        let out = smotenc_balance(&rows, &plan).unwrap();
        prop_assert_eq!(&out[..rows.len()], &rows[..]);
        let mut hist = [0usize; 3];
        for r in &out {
            hist[r.label] += 1;
        }
        prop_assert_eq!(hist, [counts.0; 3]);
        for s in &out[rows.len()..] {
            prop_assert!(s.synthetic);
            let seed_row = &rows[s.source];
            prop_assert_eq!(seed_row.label, s.label);
            prop_assert_eq!(&s.aux_copy, &seed_row.aux_copy);
            // Numeric part lies on a segment to some same-class original,
            // and the carried interpolated block uses the same step.
            let on_segment = rows.iter().filter(|o| o.label == s.label).any(|o| {
                segment_step(&seed_row.dense, &o.dense, &s.dense).is_some_and(|t| {
                    (-1e-9..=1.0 + 1e-9).contains(&t)
                        && (seed_row.aux_interp[0] + t * (o.aux_interp[0] - seed_row.aux_interp[0]) - s.aux_interp[0]).abs() < 1e-9
                })
            });
            prop_assert!(on_segment);
            for (j, c) in s.codes.iter().enumerate() {
                prop_assert!(rows.iter().any(|o| o.label == s.label && o.codes[j] == *c));
            }
        }
        prop_assert_eq!(smotenc_balance(&rows, &plan).unwrap(), out);
    }
}
