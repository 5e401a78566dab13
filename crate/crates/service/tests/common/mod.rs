#![allow(dead_code)]

use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use triad_core::augment::{augment, AugmentConfig};
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::explain::{
    compose_rationale, Attribution, Clock, CitedPassage, Direction, FeatureContribution, InterventionPlan, ManualClock,
    RationaleInputs, RiskFactor,
};
use triad_core::features::stratified_split;
use triad_core::fusion::Variant;
use triad_core::pipeline::{prepare_variant, train_model, Background, DataDir, ModelKind, PipelineConfig};
use triad_core::textpipe::{Sentiment, StressTag, TextPipeline};
use triad_service::store::{AlertDraft, AlertEventKind, Event, Store, StoreState};
use triad_service::ServiceConfig;

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 12, 5, 9, 0, 0).unwrap()
}

pub const TAGS: [StressTag; 4] = [StressTag::Isolation, StressTag::Workload, StressTag::Confusion, StressTag::None];

/// Alert draft with hand-made rationale and attribution.
pub fn draft(student: &str, risk: f64, stress: StressTag, now: DateTime<Utc>) -> AlertDraft {
    let plan = InterventionPlan::for_tag(stress, now);
    let rationale = compose_rationale(RationaleInputs {
        quote: Some("i'm still lost in module 3 quizzes".into()),
        passage: Some(CitedPassage {
            id: "faq-peer-study-groups".into(),
            title: "Peer study groups".into(),
            source: "FAQ".into(),
        }),
        sentiment: Sentiment::Negative,
        stress,
        risk,
        week: 5,
        factor: Some(RiskFactor {
            field: "curricular_units_1st_sem_grade".into(),
            value: 8.3,
            direction: Some(Direction::Low),
            phi: 0.21,
        }),
        next_step: plan.describe(),
    });
    AlertDraft {
        id: format!("a-{student}"),
        student_id: student.into(),
        risk,
        probs: [(1.0 - risk) * 0.6, risk, (1.0 - risk) * 0.4],
        rationale,
        plan,
        attribution: Attribution {
            features: vec![
                FeatureContribution {
                    name: "curricular_units_1st_sem_grade".into(),
                    phi: 0.21,
                },
                FeatureContribution {
                    name: "tuition_fees_up_to_date".into(),
                    phi: 0.05,
                },
            ],
            prediction: risk,
            base_value: risk - 0.26,
            additivity_gap: 0.0,
            samples: 1000,
            background_size: 1000,
            modality: None,
        },
        run_id: "run-000001".into(),
        cohort_version: "c".into(),
        model_version: "m".into(),
    }
}

/// The worked alert: isolation, low first-semester grade, risk 0.78.
pub fn worked_alert(now: DateTime<Utc>) -> AlertDraft {
    draft("s-0042", 0.78, StressTag::Isolation, now)
}

pub fn state_bytes(s: &StoreState) -> Vec<u8> {
    serde_json::to_vec(s).unwrap()
}

/// Outcome of one randomized lifecycle script.
pub struct ScriptResult {
    pub commits: usize,
    pub rejected: usize,
    pub crashes: usize,
    /// Every reopen and the final log replay matched the live state.
    pub consistent: bool,
}

/// Drives a store through random scoring upserts, lifecycle events (some
/// with stale revisions), snapshots and simulated crashes. Each crash drops
/// the store, sometimes leaving a torn half-written record, and reopens it;
/// the recovered state must equal the state before the crash byte for byte.
pub fn run_script(dir: &Path, rng: &mut ChaCha8Rng, steps: usize) -> ScriptResult {
    let clock = ManualClock::new(t0());
    let snapshot_every = rng.random_range(1..20);
    let mut store = Store::open(dir, snapshot_every).unwrap();
    let mut res = ScriptResult {
        commits: 0,
        rejected: 0,
        crashes: 0,
        consistent: true,
    };
    let students: Vec<String> = (0..8).map(|i| format!("s{i}")).collect();
    for _ in 0..steps {
        clock.advance(Duration::hours(rng.random_range(0..60)));
        let roll: f64 = rng.random();
        let outcome = if roll < 0.3 {
            let s = &students[rng.random_range(0..students.len())];
            let risk = (rng.random_range(50..100) as f64) / 100.0;
            let tag = TAGS[rng.random_range(0..4)];
            let events = vec![Event::AlertScored {
                alert: Box::new(draft(s, risk, tag, clock.now())),
            }];
            store.commit_many(events, clock.now()).map(|_| ())
        } else if roll < 0.85 {
            let ids: Vec<(String, u64)> = store
                .state()
                .alerts
                .values()
                .map(|a| (a.id.clone(), a.revision))
                .collect();
            if ids.is_empty() {
                continue;
            }
            let (id, rev) = ids[rng.random_range(0..ids.len())].clone();
            let kinds = [
                AlertEventKind::Acknowledged,
                AlertEventKind::InterventionSent,
                AlertEventKind::Responded,
                AlertEventKind::EscalateCheck,
                AlertEventKind::Closed,
            ];
            let kind = kinds[rng.random_range(0..kinds.len())];
            let revision = if rng.random::<f64>() < 0.15 { rev.saturating_sub(1) } else { rev };
            store
                .commit(
                    Event::AlertEvent {
                        alert_id: id,
                        kind,
                        actor: Some("tutor-1".into()),
                        revision,
                    },
                    clock.now(),
                )
                .map(|_| ())
        } else if roll < 0.9 {
            store.snapshot().map(|_| ())
        } else {
            let before = state_bytes(store.state());
            let log = store.log_path();
            drop(store);
            if rng.random::<bool>() {
                use std::io::Write;
                let mut f = std::fs::OpenOptions::new().append(true).open(&log).unwrap();
                f.write_all(br#"{"v":1,"seq":999999,"at":"2025-"#).unwrap();
            }
            store = Store::open(dir, snapshot_every).unwrap();
            res.crashes += 1;
            if state_bytes(store.state()) != before {
                res.consistent = false;
            }
            Ok(())
        };
        match outcome {
            Ok(()) => res.commits += 1,
            Err(_) => res.rejected += 1,
        }
    }
    let live = state_bytes(store.state());
    let (records, torn) = triad_service::store::read_log(&store.log_path()).unwrap();
    let replayed = StoreState::replay(&records).unwrap();
    drop(store);
    let reopened = Store::open(dir, 1000).unwrap();
    res.consistent &= torn.is_none() && state_bytes(&replayed) == live && state_bytes(reopened.state()) == live;
    res
}

/// Pipeline settings small enough for tests: few epochs and Shapley samples.
pub fn quick_pipeline(seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::default().with_seed(seed);
    cfg.triad.epochs = 4;
    cfg.mlp.epochs = 4;
    cfg.shapley_samples = 40;
    cfg.background_size = 100;
    cfg.eval.resamples = 200;
    cfg
}

/// Writes a small augmented cohort, split, feature model, background and a
/// trained fusion model under `root`. Returns the matching service config.
pub fn small_data_dir(root: &Path) -> ServiceConfig {
    let pcfg = quick_pipeline(0);
    let dir = DataDir::new(root);
    let cohort = surrogate_cohort(&SurrogateConfig {
        class_counts: [220, 140, 80],
        ..Default::default()
    })
    .unwrap();
    let cohort = augment(cohort, &AugmentConfig::default()).unwrap();
    cohort.write_jsonl(&dir.augmented()).unwrap();
    let split = stratified_split(&cohort, pcfg.test_frac, pcfg.seed).unwrap();
    std::fs::write(dir.split(), serde_json::to_vec(&split).unwrap()).unwrap();
    let mut tp = TextPipeline::reference().unwrap();
    let data = prepare_variant(&cohort, &split, &mut tp, Variant::Full, &pcfg).unwrap();
    data.features.write(&dir.features()).unwrap();
    Background {
        x_tab: data.background.clone(),
    }
    .write(&dir.background())
    .unwrap();
    train_model(ModelKind::Triad, &data, &pcfg)
        .unwrap()
        .write(&dir.model("triad"))
        .unwrap();
    ServiceConfig {
        data_dir: root.to_path_buf(),
        threshold: 0.5,
        workers: 2,
        pipeline: pcfg,
        ..Default::default()
    }
}
