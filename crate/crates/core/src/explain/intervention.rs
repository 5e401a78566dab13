use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

use crate::textpipe::StressTag;
use crate::{Error, Result};

/// Source of "now" for every deadline decision.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Logical clock moved by hand.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }

    pub fn set(&self, t: DateTime<Utc>) {
        *self.0.lock().unwrap() = t;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanState {
    Proposed,
    Delivered,
    Responded,
    Escalated,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanEvent {
    /// The default action went out.
    Deliver,
    /// The learner answered.
    Respond,
    /// Escalate if the deadline has passed with no response; otherwise a
    /// no-op.
    EscalateCheck,
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: PlanState,
    pub to: PlanState,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionPlan {
    pub stress: StressTag,
    pub action: String,
    /// Target time for delivering the default action.
    pub action_within_hours: Option<i64>,
    pub escalation: Option<String>,
    /// Time after delivery with no response before escalating.
    pub escalate_after_hours: Option<i64>,
    pub state: PlanState,
    pub proposed_at: DateTime<Utc>,
    pub delivered_at: Option<DateTime<Utc>>,
    pub transitions: Vec<Transition>,
}

const WEEK_HOURS: i64 = 7 * 24;

impl InterventionPlan {
    pub fn for_tag(stress: StressTag, now: DateTime<Utc>) -> Self {
        let (action, within, escalation) = match stress {
            StressTag::Isolation => ("Peer-mentor email", Some(48), Some("Counsellor call")),
            StressTag::Workload => ("Time-management webinar link", None, Some("One-to-one coaching slot")),
            StressTag::Confusion => ("FAQ link + forum tag", None, Some("Synchronous Q&A session")),
            StressTag::None => ("Generic encouragement", None, None),
        };
        Self {
            stress,
            action: action.to_string(),
            action_within_hours: within,
            escalation: escalation.map(str::to_string),
            escalate_after_hours: escalation.map(|_| WEEK_HOURS),
            state: PlanState::Proposed,
            proposed_at: now,
            delivered_at: None,
            transitions: Vec::new(),
        }
    }

    pub fn escalation_deadline(&self) -> Option<DateTime<Utc>> {
        Some(self.delivered_at? + Duration::hours(self.escalate_after_hours?))
    }

    /// Action currently owed to the learner.
    pub fn current_action(&self) -> &str {
        match (self.state, &self.escalation) {
            (PlanState::Escalated, Some(e)) => e,
            _ => &self.action,
        }
    }

    /// One-line description used in rationales.
    pub fn describe(&self) -> String {
        let mut s = self.action.clone();
        if let Some(h) = self.action_within_hours {
            s.push_str(&format!(" within {h} h"));
        }
        if let (Some(e), Some(h)) = (&self.escalation, self.escalate_after_hours) {
            s.push_str(&format!("; if no response, {} at +{} d", e.to_lowercase(), h / 24));
        }
        s
    }

    fn go(&mut self, to: PlanState, at: DateTime<Utc>) {
        self.transitions.push(Transition { from: self.state, to, at });
        self.state = to;
    }

    /// Applies `event` at `clock.now()`.
    pub fn advance(mut self, event: PlanEvent, clock: &dyn Clock) -> Result<Self> {
        let now = clock.now();
        use PlanState::*;
        match (self.state, event) {
            (Proposed, PlanEvent::Deliver) => {
                self.delivered_at = Some(now);
                self.go(Delivered, now);
            }
            (Delivered, PlanEvent::Respond) => self.go(Responded, now),
            (Delivered, PlanEvent::EscalateCheck) => {
                if self.escalation_deadline().is_some_and(|d| now >= d) {
                    self.go(Escalated, now);
                }
            }
            (_, PlanEvent::EscalateCheck) => {}
            (Responded | Escalated, PlanEvent::Close) => self.go(Closed, now),
            (state, ev) => {
                return Err(Error::IllegalTransition(format!("{ev:?} in state {state:?}")));
            }
        }
        Ok(self)
    }
}

/// Plan for a stress tag given by name.
pub fn map_intervention(tag: &str, now: DateTime<Utc>) -> Result<InterventionPlan> {
    let t = StressTag::parse(tag).ok_or_else(|| Error::UnknownTag(tag.to_string()))?;
    Ok(InterventionPlan::for_tag(t, now))
}
