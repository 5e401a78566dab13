use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::prompt::Prompt;
use super::{words, Sentiment, StressTag};
use crate::util::softmax;

/// Weight of retrieved-passage evidence relative to the comment (1.0).
pub const PASSAGE_WEIGHT: f64 = 0.3;

/// Sentiment and stress distributions for one prompt.
pub trait AffectClassifier: Send + Sync {
    /// Probabilities over (negative, neutral, positive).
    fn sentiment(&self, prompt: &Prompt) -> [f64; 3];
    /// Probabilities over (isolation, workload, confusion, none).
    fn stress(&self, prompt: &Prompt) -> [f64; 4];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectLabels {
    pub sentiment_probs: [f64; 3],
    pub stress_probs: [f64; 4],
    pub sentiment: Sentiment,
    pub stress: StressTag,
}

impl AffectLabels {
    /// Argmax labels; exact ties resolve to `neutral` / `none`, then to the
    /// lowest index.
    pub fn from_probs(sentiment_probs: [f64; 3], stress_probs: [f64; 4]) -> Self {
        let sentiment = Sentiment::ALL[argmax_prefer(&sentiment_probs, Sentiment::Neutral.index())];
        let stress = StressTag::ALL[argmax_prefer(&stress_probs, StressTag::None.index())];
        Self {
            sentiment_probs,
            stress_probs,
            sentiment,
            stress,
        }
    }

    /// Silent-student default: uniform sentiment, `none` stress.
    pub fn silent() -> Self {
        Self::from_probs([1.0 / 3.0; 3], [0.25; 4])
    }
}

fn argmax_prefer(p: &[f64], preferred: usize) -> usize {
    let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if p[preferred] == max {
        return preferred;
    }
    p.iter().position(|v| *v == max).unwrap_or(preferred)
}

const NEGATIVE: &[&str] = &[
    "hate", "awful", "terrible", "horrible", "bad", "worse", "worst", "sad", "unhappy", "angry",
    "annoyed", "upset", "frustrated", "frustrating", "upsetting", "disappointed", "disappointing",
    "discouraged", "hopeless", "miserable", "exhausted", "tired", "bored", "boring", "stressed",
    "stressful", "anxious", "worried", "afraid", "scared", "panicked", "struggling", "struggle",
    "difficult", "hard", "overwhelmed", "drowning", "lonely", "isolated", "alone", "confused",
    "lost", "quitting", "useless", "unfair", "ignored", "penalties",
];

const POSITIVE: &[&str] = &[
    "great", "good", "love", "loved", "enjoy", "enjoyed", "enjoying", "helpful", "excellent",
    "happy", "thanks", "thank", "amazing", "interesting", "fun", "motivated", "confident", "proud",
    "glad", "nice", "appreciate", "wonderful", "easy", "clear", "calm", "connected", "best",
];

const NEUTRAL: &[&str] = &[
    "question", "wondering", "information", "schedule", "timetable", "reminder", "noted", "okay",
    "ok", "fine", "update", "available", "posted", "asked", "registered", "listed",
];

const NEGATORS: &[&str] = &["not", "no", "never", "dont", "didnt", "isnt", "wasnt", "cant", "cannot"];

const ISOLATION: &[&str] = &[
    "isolated", "isolation", "alone", "lonely", "loneliness", "nobody", "disconnected",
    "excluded", "invisible", "ignored",
];
const WORKLOAD: &[&str] = &[
    "workload", "overwhelmed", "deadlines", "drowning", "overload", "overloaded", "juggling",
    "exhausted", "behind", "pressure",
];
const CONFUSION: &[&str] = &[
    "confused", "confusing", "confusion", "lost", "unclear", "unsure", "puzzled", "clueless",
    "baffled",
];
/// Multi-word stress markers, matched on consecutive tokens.
const STRESS_PHRASES: &[(&[&str], StressTag)] = &[
    (&["no", "one"], StressTag::Isolation),
    (&["on", "my", "own"], StressTag::Isolation),
    (&["too", "many"], StressTag::Workload),
    (&["no", "time"], StressTag::Workload),
    (&["dont", "understand"], StressTag::Confusion),
    (&["makes", "no", "sense"], StressTag::Confusion),
];

/// Weighted lexicon scorer. Comment evidence counts at 1.0; each retrieved
/// passage contributes its normalised evidence profile scaled by
/// `PASSAGE_WEIGHT` and its (non-negative) similarity. Scores pass through a
/// temperature-1 softmax.
#[derive(Debug, Clone)]
pub struct LexiconClassifier {
    sentiment_of: HashMap<&'static str, Sentiment>,
    stress_of: HashMap<&'static str, StressTag>,
    pub passage_weight: f64,
}

impl Default for LexiconClassifier {
    fn default() -> Self {
        let mut sentiment_of = HashMap::new();
        for w in NEGATIVE {
            sentiment_of.insert(*w, Sentiment::Negative);
        }
        for w in POSITIVE {
            sentiment_of.insert(*w, Sentiment::Positive);
        }
        for w in NEUTRAL {
            sentiment_of.insert(*w, Sentiment::Neutral);
        }
        let mut stress_of = HashMap::new();
        for (list, tag) in [
            (ISOLATION, StressTag::Isolation),
            (WORKLOAD, StressTag::Workload),
            (CONFUSION, StressTag::Confusion),
        ] {
            for w in list {
                stress_of.insert(*w, tag);
            }
        }
        Self {
            sentiment_of,
            stress_of,
            passage_weight: PASSAGE_WEIGHT,
        }
    }
}

impl LexiconClassifier {
    /// Raw sentiment evidence: one unit per lexicon hit; a negator within the
    /// two preceding tokens turns positive into negative and negative into
    /// neutral.
    pub fn sentiment_evidence(&self, text: &str) -> [f64; 3] {
        let toks = words(text);
        let mut e = [0.0; 3];
        for (i, t) in toks.iter().enumerate() {
            let Some(&s) = self.sentiment_of.get(t.as_str()) else {
                continue;
            };
            let negated = toks[i.saturating_sub(2)..i]
                .iter()
                .any(|p| NEGATORS.contains(&p.as_str()));
            let s = match (s, negated) {
                (Sentiment::Positive, true) => Sentiment::Negative,
                (Sentiment::Negative, true) => Sentiment::Neutral,
                (s, _) => s,
            };
            e[s.index()] += 1.0;
        }
        e
    }

    /// Raw stress evidence over (isolation, workload, confusion, none). The
    /// `none` slot is never incremented by comment text.
    pub fn stress_evidence(&self, text: &str) -> [f64; 4] {
        let toks = words(text);
        let mut e = [0.0; 4];
        for t in &toks {
            if let Some(tag) = self.stress_of.get(t.as_str()) {
                e[tag.index()] += 1.0;
            }
        }
        for (phrase, tag) in STRESS_PHRASES {
            let n = phrase.len();
            if toks.len() >= n {
                e[tag.index()] += toks
                    .windows(n)
                    .filter(|w| w.iter().zip(phrase.iter()).all(|(a, b)| a == b))
                    .count() as f64;
            }
        }
        e
    }

    /// Normalised evidence profile of a passage; a passage with no hits
    /// counts entirely toward the default class.
    fn profile<const N: usize>(raw: [f64; N], default: usize) -> [f64; N] {
        let total: f64 = raw.iter().sum();
        let mut out = [0.0; N];
        if total > 0.0 {
            for (o, r) in out.iter_mut().zip(raw) {
                *o = r / total;
            }
        } else {
            out[default] = 1.0;
        }
        out
    }

    fn scores<const N: usize>(
        &self,
        prompt: &Prompt,
        evidence: impl Fn(&str) -> [f64; N],
        default: usize,
    ) -> [f64; N] {
        let mut s = evidence(&prompt.comment);
        for p in &prompt.passages {
            let w = self.passage_weight * p.similarity.max(0.0);
            let prof = Self::profile(evidence(&p.text), default);
            for (si, pi) in s.iter_mut().zip(prof) {
                *si += w * pi;
            }
        }
        s
    }
}

impl AffectClassifier for LexiconClassifier {
    fn sentiment(&self, prompt: &Prompt) -> [f64; 3] {
        let s = self.scores(prompt, |t| self.sentiment_evidence(t), Sentiment::Neutral.index());
        softmax(&s).try_into().unwrap()
    }

    fn stress(&self, prompt: &Prompt) -> [f64; 4] {
        let s = self.scores(prompt, |t| self.stress_evidence(t), StressTag::None.index());
        softmax(&s).try_into().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textpipe::{build_prompt, RetrievalResult};

    fn bare(comment: &str) -> Prompt {
        build_prompt(comment, &RetrievalResult::empty(3), 512)
    }

    #[test]
    fn distributions_are_normalised() {
        let c = LexiconClassifier::default();
        for text in ["", "great course", "i hate this, so confused and alone", "question about week 2"] {
            let p = bare(text);
            let s = c.sentiment(&p);
            let t = c.stress(&p);
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(s.iter().chain(t.iter()).all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn stress_markers() {
        let c = LexiconClassifier::default();
        let tag = |t: &str| AffectLabels::from_probs(c.sentiment(&bare(t)), c.stress(&bare(t))).stress;
        assert_eq!(tag("i feel isolated in module 3"), StressTag::Isolation);
        assert_eq!(tag("three deadlines and no time to sleep"), StressTag::Workload);
        assert_eq!(tag("i dont understand the notation at all"), StressTag::Confusion);
        assert_eq!(tag("the videos are great"), StressTag::None);
    }

    #[test]
    fn negation_flips_positive() {
        let c = LexiconClassifier::default();
        assert_eq!(c.sentiment_evidence("this is not helpful"), [1.0, 0.0, 0.0]);
        assert_eq!(c.sentiment_evidence("i am not worried"), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn tie_resolution_prefers_defaults() {
        let l = AffectLabels::from_probs([1.0 / 3.0; 3], [0.25; 4]);
        assert_eq!(l.sentiment, Sentiment::Neutral);
        assert_eq!(l.stress, StressTag::None);
        let l = AffectLabels::from_probs([0.4, 0.2, 0.4], [0.3, 0.3, 0.2, 0.2]);
        assert_eq!(l.sentiment, Sentiment::Negative);
        assert_eq!(l.stress, StressTag::Isolation);
    }
}

/// Domain phrases whose negative reading depends on course context. Each is
/// gold-labelled negative.
pub const GROUNDING_PROBES: &[&str] = &[
    "i failed the quiz again",
    "resubmission portal down",
    "my grade is still not posted",
    "locked out of the virtual lab",
    "upload keeps failing before the deadline",
    "still waiting on my assignment grade",
    "three deadlines in one week",
    "nobody replies to my messages",
    "thinking about withdrawing",
    "missed the census date for my tuition",
    "the lab report got sent back again",
    "exam next week and i have not started",
];

#[cfg(test)]
mod grounding_tests {
    use super::*;
    use crate::textpipe::TextPipeline;

    #[test]
    fn retrieval_moves_probes_toward_negative() {
        let mut tp = TextPipeline::reference().unwrap();
        let mut moved = 0;
        for probe in GROUNDING_PROBES {
            tp.use_retrieval = false;
            let bare = tp.analyze(probe).unwrap().affect;
            tp.use_retrieval = true;
            let grounded = tp.analyze(probe).unwrap().affect;
            if bare.sentiment != grounded.sentiment && grounded.sentiment == Sentiment::Negative {
                moved += 1;
            }
        }
        assert!(moved * 4 >= GROUNDING_PROBES.len(), "moved {moved}");
    }
}
