//! Cohort scoring runs: score every learner, explain the flagged ones and
//! upsert their alerts.

use std::path::PathBuf;
use std::sync::RwLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use triad_core::dataset::{CleanCohort, StudentRecord};
use triad_core::explain::Clock;
use triad_core::features::SplitPlan;
use triad_core::pipeline::{Background, DataDir, Scorer};

use crate::config::ServiceConfig;
use crate::error::{Result, ServiceError};
use crate::store::{AlertDraft, Event, Outcome, RunSummary, Store};

/// Body of `POST /runs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    /// `test` (held-out fold), `augmented` (whole cohort) or a path to a
    /// cohort file.
    #[serde(default = "default_cohort")]
    pub cohort: String,
    /// Model artifact name; defaults to the configured model.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_cohort() -> String {
    "test".into()
}

impl Default for RunRequest {
    fn default() -> Self {
        Self {
            cohort: default_cohort(),
            model: None,
            threshold: None,
        }
    }
}

/// Short content hash used as a dataset or model version.
pub fn content_version(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Alert id for a learner under one (cohort, model) pair.
pub fn alert_id(cohort_version: &str, model_version: &str, student_id: &str) -> String {
    content_version(&[cohort_version.as_bytes(), model_version.as_bytes(), student_id.as_bytes()])
}

fn read_artifact(path: &std::path::Path, missing: fn(String) -> triad_core::Error) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => missing(path.display().to_string()).into(),
        _ => ServiceError::from(e),
    })
}

/// Everything a run needs, resolved and versioned up front so that missing
/// artifacts fail before anything is logged.
pub struct ResolvedRun {
    pub cohort: String,
    pub model: String,
    pub threshold: f64,
    pub rows: Vec<StudentRecord>,
    pub cohort_version: String,
    pub model_version: String,
}

pub fn resolve(dir: &DataDir, cfg: &ServiceConfig, req: &RunRequest) -> Result<ResolvedRun> {
    let threshold = req.threshold.unwrap_or(cfg.threshold);
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(ServiceError::InvalidBody(format!("threshold {threshold} must be >= 0")));
    }
    let model = req.model.clone().unwrap_or_else(|| cfg.model.clone());
    if model.is_empty() || model.contains(['/', '\\']) || model.starts_with('.') {
        return Err(ServiceError::InvalidBody(format!("bad model name {model:?}")));
    }
    let model_bytes = read_artifact(&dir.model(&model), triad_core::Error::ModelMissing)?;
    let (path, split) = match req.cohort.as_str() {
        "test" => (dir.augmented(), Some(dir.split())),
        "augmented" => (dir.augmented(), None),
        other => (PathBuf::from(other), None),
    };
    let cohort_bytes = read_artifact(&path, triad_core::Error::CohortMissing)?;
    let all = CleanCohort::read_jsonl(&path)?;
    let (rows, cohort_version) = match split {
        Some(sp) => {
            let split_bytes = read_artifact(&sp, triad_core::Error::CohortMissing)?;
            let plan: SplitPlan = serde_json::from_slice(&split_bytes)?;
            let rows = plan
                .test
                .iter()
                .map(|&i| {
                    all.rows.get(i).cloned().ok_or_else(|| {
                        triad_core::Error::CohortMissing(format!("split index {i} outside cohort")).into()
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, content_version(&[&cohort_bytes, &split_bytes]))
        }
        None => (all.rows, content_version(&[&cohort_bytes])),
    };
    Ok(ResolvedRun {
        cohort: req.cohort.clone(),
        model,
        threshold,
        rows,
        cohort_version,
        model_version: content_version(&[&model_bytes]),
    })
}

/// Logs the start of a run and returns its id.
pub fn start(store: &RwLock<Store>, run: &ResolvedRun, now: DateTime<Utc>) -> Result<String> {
    let mut s = store.write().expect("store lock");
    let run_id = format!("run-{:06}", s.next_seq());
    s.commit(
        Event::RunStarted {
            run_id: run_id.clone(),
            cohort: run.cohort.clone(),
            model: run.model.clone(),
            threshold: run.threshold,
            cohort_version: run.cohort_version.clone(),
            model_version: run.model_version.clone(),
        },
        now,
    )?;
    Ok(run_id)
}

/// Splits `0..n` into `parts` contiguous ranges.
fn chunks(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let size = n.div_ceil(parts);
    (0..parts)
        .map(|p| (p * size).min(n)..((p + 1) * size).min(n))
        .filter(|r| !r.is_empty())
        .collect()
}

/// Scores and explains a resolved run. Pure with respect to the store.
pub fn compute(
    dir: &DataDir,
    cfg: &ServiceConfig,
    run: &ResolvedRun,
    run_id: &str,
    now: DateTime<Utc>,
) -> Result<(Vec<AlertDraft>, usize)> {
    let pcfg = cfg.pipeline();
    let scorer = Scorer::load(dir, &run.model, pcfg.augment.clone())?;
    let background = Background::read(&dir.background())?;
    let workers = cfg.workers();
    let ranges = chunks(run.rows.len(), workers);

    let probs: Vec<[f64; 3]> = std::thread::scope(|sc| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|r| {
                let rows = &run.rows[r.clone()];
                let scorer = &scorer;
                sc.spawn(move || scorer.score_many(rows, cfg.batch_size))
            })
            .collect();
        let mut out = Vec::with_capacity(run.rows.len());
        for h in handles {
            out.extend(h.join().expect("scoring worker")?);
        }
        Ok::<_, ServiceError>(out)
    })?;

    let flagged: Vec<usize> = (0..run.rows.len()).filter(|&i| probs[i][1] >= run.threshold).collect();
    let ranges = chunks(flagged.len(), workers);
    let drafts: Vec<AlertDraft> = std::thread::scope(|sc| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|r| {
                let idx = &flagged[r.clone()];
                let (scorer, background, pcfg) = (&scorer, &background, &pcfg);
                sc.spawn(move || {
                    idx.iter()
                        .map(|&i| {
                            let row = &run.rows[i];
                            let ex = scorer.explain(
                                row,
                                background.x_tab.view(),
                                pcfg.shapley_samples,
                                pcfg.seed,
                                now,
                            )?;
                            Ok(AlertDraft {
                                id: alert_id(&run.cohort_version, &run.model_version, &row.id),
                                student_id: row.id.clone(),
                                risk: ex.scored.risk(),
                                probs: ex.scored.probs,
                                rationale: ex.rationale,
                                plan: ex.plan,
                                attribution: ex.attribution,
                                run_id: run_id.to_string(),
                                cohort_version: run.cohort_version.clone(),
                                model_version: run.model_version.clone(),
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(flagged.len());
        for h in handles {
            out.extend(h.join().expect("explain worker")?);
        }
        Ok::<_, ServiceError>(out)
    })?;
    Ok((drafts, run.rows.len()))
}

/// Upserts the drafts and closes the run.
pub fn finish(
    store: &RwLock<Store>,
    run_id: &str,
    drafts: Vec<AlertDraft>,
    scored: usize,
    now: DateTime<Utc>,
) -> Result<RunSummary> {
    let mut s = store.write().expect("store lock");
    let mut summary = RunSummary {
        scored,
        flagged: drafts.len(),
        ..Default::default()
    };
    let events = drafts
        .into_iter()
        .map(|d| Event::AlertScored { alert: Box::new(d) })
        .collect();
    for o in s.commit_many(events, now)? {
        match o {
            Outcome::Created => summary.created += 1,
            Outcome::Updated => summary.updated += 1,
            _ => summary.unchanged += 1,
        }
    }
    s.commit(
        Event::RunFinished {
            run_id: run_id.to_string(),
            summary: summary.clone(),
        },
        now,
    )?;
    Ok(summary)
}

fn fail(store: &RwLock<Store>, run_id: &str, e: &ServiceError, now: DateTime<Utc>) {
    let res = store.write().expect("store lock").commit(
        Event::RunFailed {
            run_id: run_id.to_string(),
            error: e.line(),
        },
        now,
    );
    if let Err(e2) = res {
        log::error!("could not record failure of {run_id}: {e2}");
    }
}

/// Runs the scoring body of an already started run, recording failure in
/// the log.
pub fn execute(
    store: &RwLock<Store>,
    dir: &DataDir,
    cfg: &ServiceConfig,
    run: &ResolvedRun,
    run_id: &str,
    clock: &dyn Clock,
) -> Result<RunSummary> {
    let result = compute(dir, cfg, run, run_id, clock.now())
        .and_then(|(drafts, scored)| finish(store, run_id, drafts, scored, clock.now()));
    if let Err(e) = &result {
        fail(store, run_id, e, clock.now());
    }
    result
}

/// Synchronous end-to-end run: resolve, log the start, score, upsert.
pub fn score_cohort(
    store: &RwLock<Store>,
    dir: &DataDir,
    cfg: &ServiceConfig,
    req: &RunRequest,
    clock: &dyn Clock,
) -> Result<(String, RunSummary)> {
    let run = resolve(dir, cfg, req)?;
    let run_id = start(store, &run, clock.now())?;
    let summary = execute(store, dir, cfg, &run, &run_id, clock)?;
    Ok((run_id, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_covers_range() {
        for (n, p) in [(0, 4), (1, 4), (10, 3), (10, 10), (7, 1)] {
            let c = chunks(n, p);
            let flat: Vec<usize> = c.iter().flat_map(|r| r.clone()).collect();
            assert_eq!(flat, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn versions_are_stable_and_length_prefixed() {
        assert_eq!(content_version(&[b"ab", b"c"]), content_version(&[b"ab", b"c"]));
        assert_ne!(content_version(&[b"ab", b"c"]), content_version(&[b"a", b"bc"]));
        assert_eq!(alert_id("c", "m", "s").len(), 16);
    }
}
