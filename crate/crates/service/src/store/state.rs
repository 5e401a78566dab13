use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use triad_core::explain::{Attribution, InterventionPlan, ManualClock, PlanEvent, PlanState, Rationale};

use crate::error::{Result, ServiceError};

/// Version of the log line and snapshot formats.
pub const LOG_VERSION: u32 = 1;

/// Tutor-facing lifecycle events accepted by `POST /alerts/{id}/events`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertEventKind {
    Acknowledged,
    InterventionSent,
    Responded,
    EscalateCheck,
    Closed,
}

impl AlertEventKind {
    fn plan_event(self) -> Option<PlanEvent> {
        match self {
            AlertEventKind::Acknowledged => None,
            AlertEventKind::InterventionSent => Some(PlanEvent::Deliver),
            AlertEventKind::Responded => Some(PlanEvent::Respond),
            AlertEventKind::EscalateCheck => Some(PlanEvent::EscalateCheck),
            AlertEventKind::Closed => Some(PlanEvent::Close),
        }
    }
}

/// Scoring output for one flagged learner, before it becomes an alert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertDraft {
    pub id: String,
    pub student_id: String,
    pub risk: f64,
    pub probs: [f64; 3],
    pub rationale: Rationale,
    pub plan: InterventionPlan,
    pub attribution: Attribution,
    pub run_id: String,
    pub cohort_version: String,
    pub model_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    /// Lifecycle event name, or `created` / `rescored`.
    pub event: String,
    pub actor: Option<String>,
    pub state: PlanState,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub id: String,
    pub student_id: String,
    /// P(Dropout).
    pub risk: f64,
    pub probs: [f64; 3],
    pub created_at: DateTime<Utc>,
    /// Log sequence number of the record that created the alert.
    pub created_seq: u64,
    pub rationale: Rationale,
    pub plan: InterventionPlan,
    pub attribution: Attribution,
    pub acknowledged_by: Option<String>,
    /// Bumped by every accepted change; clients echo it back.
    pub revision: u64,
    pub history: Vec<HistoryEntry>,
    pub run_id: String,
    pub cohort_version: String,
    pub model_version: String,
}

impl Alert {
    pub fn state(&self) -> PlanState {
        self.plan.state
    }

    pub fn escalation_due(&self) -> Option<DateTime<Utc>> {
        self.plan.escalation_deadline()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Finished,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scored: usize,
    pub flagged: usize,
    pub created: usize,
    pub updated: usize,
    pub unchanged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub status: RunStatus,
    pub cohort: String,
    pub model: String,
    pub threshold: f64,
    pub cohort_version: String,
    pub model_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

/// Everything that can be written to the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    RunStarted {
        run_id: String,
        cohort: String,
        model: String,
        threshold: f64,
        cohort_version: String,
        model_version: String,
    },
    /// Creates the alert, or refreshes scores and rationale of an existing
    /// one while keeping its lifecycle.
    AlertScored { alert: Box<AlertDraft> },
    RunFinished { run_id: String, summary: RunSummary },
    RunFailed { run_id: String, error: String },
    AlertEvent {
        alert_id: String,
        kind: AlertEventKind,
        actor: Option<String>,
        /// Revision the client last saw.
        revision: u64,
    },
}

/// One log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub v: u32,
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub event: Event,
}

/// Effect of one validated record, ready to install.
#[derive(Debug, Clone)]
pub enum Mutation {
    Run(Box<RunRecord>),
    Alert(Box<Alert>, Outcome),
}

/// What an `AlertScored` record did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Created,
    Updated,
    Unchanged,
    Changed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreState {
    /// Sequence number of the last applied record.
    pub seq: u64,
    pub alerts: BTreeMap<String, Alert>,
    pub runs: BTreeMap<String, RunRecord>,
    pub dataset_version: Option<String>,
    pub model_version: Option<String>,
    pub last_run: Option<String>,
}

impl StoreState {
    /// Validates `rec` against the current state without changing it.
    pub fn plan(&self, rec: &LogRecord) -> Result<Mutation> {
        if rec.v != LOG_VERSION {
            return Err(ServiceError::InvalidBody(format!("unsupported log version {}", rec.v)));
        }
        match &rec.event {
            Event::RunStarted {
                run_id,
                cohort,
                model,
                threshold,
                cohort_version,
                model_version,
            } => {
                if self.runs.contains_key(run_id) {
                    return Err(ServiceError::InvalidBody(format!("run {run_id} already exists")));
                }
                Ok(Mutation::Run(Box::new(RunRecord {
                    id: run_id.clone(),
                    status: RunStatus::Running,
                    cohort: cohort.clone(),
                    model: model.clone(),
                    threshold: *threshold,
                    cohort_version: cohort_version.clone(),
                    model_version: model_version.clone(),
                    started_at: rec.at,
                    finished_at: None,
                    summary: None,
                    error: None,
                })))
            }
            Event::RunFinished { run_id, summary } => {
                let mut run = self.running(run_id)?;
                run.status = RunStatus::Finished;
                run.finished_at = Some(rec.at);
                run.summary = Some(summary.clone());
                Ok(Mutation::Run(Box::new(run)))
            }
            Event::RunFailed { run_id, error } => {
                let mut run = self.running(run_id)?;
                run.status = RunStatus::Failed;
                run.finished_at = Some(rec.at);
                run.error = Some(error.clone());
                Ok(Mutation::Run(Box::new(run)))
            }
            Event::AlertScored { alert: d } => {
                if !(0.0..=1.0).contains(&d.risk) {
                    return Err(ServiceError::InvalidBody(format!("risk {} outside [0, 1]", d.risk)));
                }
                match self.alerts.get(&d.id) {
                    None => {
                        let alert = Alert {
                            id: d.id.clone(),
                            student_id: d.student_id.clone(),
                            risk: d.risk,
                            probs: d.probs,
                            created_at: rec.at,
                            created_seq: rec.seq,
                            rationale: d.rationale.clone(),
                            plan: d.plan.clone(),
                            attribution: d.attribution.clone(),
                            acknowledged_by: None,
                            revision: 1,
                            history: vec![HistoryEntry {
                                seq: rec.seq,
                                at: rec.at,
                                event: "created".into(),
                                actor: None,
                                state: d.plan.state,
                                revision: 1,
                            }],
                            run_id: d.run_id.clone(),
                            cohort_version: d.cohort_version.clone(),
                            model_version: d.model_version.clone(),
                        };
                        Ok(Mutation::Alert(Box::new(alert), Outcome::Created))
                    }
                    Some(old) => {
                        let same = old.risk == d.risk
                            && old.probs == d.probs
                            && old.rationale == d.rationale
                            && old.attribution == d.attribution;
                        let mut a = old.clone();
                        a.run_id = d.run_id.clone();
                        if same {
                            return Ok(Mutation::Alert(Box::new(a), Outcome::Unchanged));
                        }
                        a.risk = d.risk;
                        a.probs = d.probs;
                        a.rationale = d.rationale.clone();
                        a.attribution = d.attribution.clone();
                        a.revision += 1;
                        a.history.push(HistoryEntry {
                            seq: rec.seq,
                            at: rec.at,
                            event: "rescored".into(),
                            actor: None,
                            state: a.plan.state,
                            revision: a.revision,
                        });
                        Ok(Mutation::Alert(Box::new(a), Outcome::Updated))
                    }
                }
            }
            Event::AlertEvent {
                alert_id,
                kind,
                actor,
                revision,
            } => {
                let old = self
                    .alerts
                    .get(alert_id)
                    .ok_or_else(|| ServiceError::NotFound(format!("alert {alert_id}")))?;
                if *revision != old.revision {
                    return Err(ServiceError::StaleRevision {
                        id: alert_id.clone(),
                        current: old.revision,
                        requested: *revision,
                    });
                }
                let mut a = old.clone();
                match kind.plan_event() {
                    Some(ev) => a.plan = a.plan.advance(ev, &ManualClock::new(rec.at))?,
                    None => {
                        if a.plan.state == PlanState::Closed {
                            return Err(triad_core::Error::IllegalTransition("acknowledged on a closed alert".into()).into());
                        }
                        a.acknowledged_by = Some(actor.clone().unwrap_or_else(|| "tutor".into()));
                    }
                }
                a.revision += 1;
                a.history.push(HistoryEntry {
                    seq: rec.seq,
                    at: rec.at,
                    event: serde_json::to_value(kind)?.as_str().unwrap_or_default().to_string(),
                    actor: actor.clone(),
                    state: a.plan.state,
                    revision: a.revision,
                });
                Ok(Mutation::Alert(Box::new(a), Outcome::Changed))
            }
        }
    }

    fn running(&self, run_id: &str) -> Result<RunRecord> {
        let run = self
            .runs
            .get(run_id)
            .ok_or_else(|| ServiceError::NotFound(format!("run {run_id}")))?;
        if run.status != RunStatus::Running {
            return Err(ServiceError::InvalidBody(format!("run {run_id} already ended")));
        }
        Ok(run.clone())
    }

    /// Installs a mutation produced by [`StoreState::plan`] for `rec`.
    pub fn install(&mut self, rec: &LogRecord, m: Mutation) {
        self.seq = rec.seq;
        match m {
            Mutation::Run(run) => {
                if run.status == RunStatus::Finished {
                    self.dataset_version = Some(run.cohort_version.clone());
                    self.model_version = Some(run.model_version.clone());
                    self.last_run = Some(run.id.clone());
                }
                self.runs.insert(run.id.clone(), *run);
            }
            Mutation::Alert(a, _) => {
                self.alerts.insert(a.id.clone(), *a);
            }
        }
    }

    pub fn apply(&mut self, rec: &LogRecord) -> Result<()> {
        let m = self.plan(rec)?;
        self.install(rec, m);
        Ok(())
    }

    /// Rebuilds state from a sequence of records.
    pub fn replay<'a>(records: impl IntoIterator<Item = &'a LogRecord>) -> Result<Self> {
        let mut s = Self::default();
        for r in records {
            s.apply(r)?;
        }
        Ok(s)
    }
}
