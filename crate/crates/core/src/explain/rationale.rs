use serde::{Deserialize, Serialize};

use crate::textpipe::{KnowledgePassage, Sentiment, StressTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitedPassage {
    pub id: String,
    pub title: String,
    pub source: String,
}

impl From<&KnowledgePassage> for CitedPassage {
    fn from(p: &KnowledgePassage) -> Self {
        Self {
            id: p.id.clone(),
            title: p.title.clone(),
            source: p.source.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Low,
    High,
}

/// Tabular field with the largest upward push on risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskFactor {
    pub field: String,
    pub value: f64,
    /// Set for numeric fields; categorical codes carry none.
    pub direction: Option<Direction>,
    pub phi: f64,
}

impl RiskFactor {
    pub fn phrase(&self) -> String {
        let name = self.field.replace('_', " ");
        match self.direction {
            Some(Direction::Low) => format!("low {name} ({})", fmt_value(self.value)),
            Some(Direction::High) => format!("high {name} ({})", fmt_value(self.value)),
            None => format!("{name} = {}", fmt_value(self.value)),
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

/// Everything the alert template needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RationaleInputs {
    /// `None` for a learner with no comments.
    pub quote: Option<String>,
    pub passage: Option<CitedPassage>,
    pub sentiment: Sentiment,
    pub stress: StressTag,
    pub risk: f64,
    pub week: u32,
    pub factor: Option<RiskFactor>,
    pub next_step: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationale {
    pub quote: Option<String>,
    pub passage: Option<CitedPassage>,
    pub sentiment: Sentiment,
    pub stress: StressTag,
    pub risk: f64,
    pub week: u32,
    pub factor: Option<RiskFactor>,
    pub next_step: String,
    pub text: String,
}

/// Fills the alert template. Comment and passage come first, then the
/// contributing factors (stress tag and top tabular factor, both listed even
/// when they point different ways), the risk and the next step. Learners
/// without comments get a variant that cites only tabular factors.
pub fn compose_rationale(inp: RationaleInputs) -> Rationale {
    let risk = inp.risk.clamp(0.0, 1.0);
    let mut parts = Vec::new();
    let mut factors = Vec::new();
    match &inp.quote {
        Some(q) => {
            parts.push(format!("At week {} the learner wrote: \"{}\".", inp.week, q));
            if let Some(p) = &inp.passage {
                parts.push(format!("A similar issue appears in {} \"{}\".", p.source, p.title));
            }
            if inp.stress != StressTag::None {
                factors.push(format!("{} tag", inp.stress.name()));
            } else if inp.sentiment == Sentiment::Negative {
                factors.push("negative tone".to_string());
            }
        }
        None => parts.push(format!("No comments from this learner by week {}.", inp.week)),
    }
    if let Some(f) = &inp.factor {
        factors.insert(0, f.phrase());
    }
    if !factors.is_empty() {
        let verb = if factors.len() > 1 { "raise" } else { "raises" };
        let mut s = factors.join(" + ");
        if let Some(c) = s.get(..1) {
            s = c.to_uppercase() + &s[1..];
        }
        parts.push(format!("{s} {verb} risk."));
    }
    parts.push(format!("Dropout risk {risk:.2}."));
    parts.push(format!("Suggested next step: {}.", inp.next_step));
    Rationale {
        text: parts.join(" "),
        quote: inp.quote,
        passage: inp.passage,
        sentiment: inp.sentiment,
        stress: inp.stress,
        risk,
        week: inp.week,
        factor: inp.factor,
        next_step: inp.next_step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alert() -> RationaleInputs {
        RationaleInputs {
            quote: Some("i'm still lost in module 3 quizzes".into()),
            passage: Some(CitedPassage {
                id: "faq-peer-study-groups".into(),
                title: "Peer study groups".into(),
                source: "FAQ".into(),
            }),
            sentiment: Sentiment::Negative,
            stress: StressTag::Isolation,
            risk: 0.78,
            week: 5,
            factor: Some(RiskFactor {
                field: "curricular_units_1st_sem_grade".into(),
                value: 8.3,
                direction: Some(Direction::Low),
                phi: 0.12,
            }),
            next_step: "invite to mentorship cohort".into(),
        }
    }

    #[test]
    fn worked_alert() {
        let r = compose_rationale(alert());
        assert_eq!(
            r.text,
            "At week 5 the learner wrote: \"i'm still lost in module 3 quizzes\". \
             A similar issue appears in FAQ \"Peer study groups\". \
             Low curricular units 1st sem grade (8.3) + isolation tag raise risk. \
             Dropout risk 0.78. Suggested next step: invite to mentorship cohort."
        );
        assert_eq!(compose_rationale(alert()), r);
    }

    #[test]
    fn silent_learner_cites_tabular_only() {
        let r = compose_rationale(RationaleInputs {
            quote: None,
            passage: None,
            stress: StressTag::None,
            sentiment: Sentiment::Neutral,
            ..alert()
        });
        assert!(r.text.starts_with("No comments from this learner by week 5."));
        assert!(r.text.contains("Low curricular units 1st sem grade (8.3) raises risk."));
        assert!(!r.text.contains("FAQ"));
    }
}
