//! Seeded synthesis of the comment corpus and recency fields that the public
//! cohort file lacks.

mod templates;

use std::path::Path;

use chrono::NaiveDate;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{CleanCohort, Comment, CommentProvenance, Outcome};
use crate::textpipe::{words, Sentiment, StressTag};
use crate::util::sub_rng;
use crate::{Error, Result};

const STREAM_COMMENTS: u64 = 0xC0_44E7;
const STREAM_TIMESTAMPS: u64 = 0x7135_7A3F;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub seed: u64,
    pub comments_per_student: usize,
    /// Target corpus fractions over (negative, neutral, positive).
    pub sentiment_mix: [f64; 3],
    pub word_count_mean: f64,
    pub word_count_sd: f64,
    pub word_count_min: usize,
    pub word_count_max: usize,
    pub term_start: NaiveDate,
    pub census_date: NaiveDate,
    /// Probability that a Dropout student writes a negative comment, and that
    /// their latent stress theme is not `none`.
    pub coupling: f64,
    /// Mean days since last grade per class, in outcome index order.
    pub grade_gap_means: [f64; 3],
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_605,
            comments_per_student: 5,
            sentiment_mix: [0.38, 0.42, 0.20],
            word_count_mean: 42.0,
            word_count_sd: 18.0,
            word_count_min: 5,
            word_count_max: 120,
            term_start: NaiveDate::from_ymd_opt(2025, 9, 15).unwrap(),
            census_date: NaiveDate::from_ymd_opt(2025, 12, 5).unwrap(),
            coupling: 0.65,
            grade_gap_means: [9.0, 38.0, 16.0],
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.sentiment_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.sentiment_mix.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sentiment_mix must be a distribution, sums to {sum}"
            )));
        }
        if !(0.0..=1.0).contains(&self.coupling) {
            return Err(Error::InvalidConfig(format!("coupling {} outside [0, 1]", self.coupling)));
        }
        if self.word_count_min == 0 || self.word_count_min > self.word_count_max {
            return Err(Error::InvalidConfig("word_count_min must be in 1..=word_count_max".into()));
        }
        if self.word_count_sd < 0.0 {
            return Err(Error::InvalidConfig("word_count_sd must be non-negative".into()));
        }
        if self.census_date < self.term_start {
            return Err(Error::InvalidConfig("census_date precedes term_start".into()));
        }
        if self.grade_gap_means.iter().any(|m| *m <= 0.0) {
            return Err(Error::InvalidConfig("grade_gap_means must be positive".into()));
        }
        Ok(())
    }

    /// Days from term start to the census date.
    pub fn term_days(&self) -> u32 {
        (self.census_date - self.term_start).num_days() as u32
    }

    /// 1-based teaching week of a comment written `age_days` before census.
    pub fn week_of(&self, age_days: u32) -> u32 {
        self.term_days().saturating_sub(age_days) / 7 + 1
    }
}

/// Label-conditional sentiment rows whose class-weighted average equals the
/// configured mix exactly. Dropout puts `coupling` mass on negative, Enrolled
/// sits 40% of the way from the mix toward the Dropout row and Graduate
/// absorbs the remainder.
pub fn sentiment_rows(mix: [f64; 3], coupling: f64, priors: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let rest = mix[1] + mix[2];
    let dropout = if rest > 0.0 {
        [coupling, (1.0 - coupling) * mix[1] / rest, (1.0 - coupling) * mix[2] / rest]
    } else {
        [1.0, 0.0, 0.0]
    };
    let tilt = 0.4;
    let enrolled: [f64; 3] = std::array::from_fn(|i| mix[i] + tilt * (dropout[i] - mix[i]));
    let (pg, pd, pe) = (priors[0], priors[1], priors[2]);
    let graduate: [f64; 3] = if pg > 0.0 {
        std::array::from_fn(|i| (mix[i] - pd * dropout[i] - pe * enrolled[i]) / pg)
    } else {
        mix
    };
    if graduate.iter().any(|p| *p < -1e-12) {
        return Err(Error::InvalidConfig(format!(
            "coupling {coupling} cannot be met with sentiment_mix {mix:?}"
        )));
    }
    let graduate = graduate.map(|p| p.max(0.0));
    Ok([graduate, dropout, enrolled])
}

/// Latent stress-theme distribution over (isolation, workload, confusion,
/// none) for one outcome.
pub fn theme_row(label: Outcome, coupling: f64) -> [f64; 4] {
    match label {
        Outcome::Dropout => [coupling * 0.5, coupling * 0.25, coupling * 0.25, 1.0 - coupling],
        Outcome::Enrolled => [0.05, 0.25, 0.2, 0.5],
        Outcome::Graduate => [0.08, 0.12, 0.1, 0.7],
    }
}

fn draw<const N: usize>(rng: &mut ChaCha8Rng, p: &[f64; N]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|x| *x > 0.0).unwrap_or(N - 1)
}

fn fill(rng: &mut ChaCha8Rng, template: &str) -> String {
    let t = *templates::TOPICS.choose(rng).unwrap();
    let u = *templates::TOPICS.choose(rng).unwrap();
    let d = *templates::DAYS.choose(rng).unwrap();
    let m = rng.random_range(1..=8).to_string();
    let w = rng.random_range(1..=12).to_string();
    let n = rng.random_range(2..=9).to_string();
    template
        .replace("{t}", t)
        .replace("{u}", u)
        .replace("{d}", d)
        .replace("{m}", &m)
        .replace("{w}", &w)
        .replace("{n}", &n)
}

fn word_target(rng: &mut ChaCha8Rng, cfg: &AugmentConfig) -> usize {
    if cfg.word_count_sd == 0.0 {
        return (cfg.word_count_mean.round() as usize).clamp(cfg.word_count_min, cfg.word_count_max);
    }
    let normal = Normal::new(cfg.word_count_mean, cfg.word_count_sd).unwrap();
    // Rejection sampling keeps the truncated normal exact.
    for _ in 0..1000 {
        let x = normal.sample(rng).round();
        if x >= cfg.word_count_min as f64 && x <= cfg.word_count_max as f64 {
            return x as usize;
        }
    }
    cfg.word_count_mean.round() as usize
}

/// One comment: a key sentence chosen by (sentiment, theme) followed by
/// neutral filler, cut to a truncated-normal word count.
fn compose(rng: &mut ChaCha8Rng, cfg: &AugmentConfig, sentiment: Sentiment, theme: StressTag) -> String {
    let bank = match (sentiment, theme) {
        (Sentiment::Negative, StressTag::Isolation) => templates::ISOLATION,
        (Sentiment::Negative, StressTag::Workload) => templates::WORKLOAD,
        (Sentiment::Negative, StressTag::Confusion) => templates::CONFUSION,
        (Sentiment::Negative, StressTag::None) => templates::NEGATIVE,
        (Sentiment::Neutral, _) => templates::NEUTRAL,
        (Sentiment::Positive, _) => templates::POSITIVE,
    };
    let target = word_target(rng, cfg);
    let key = *bank.choose(rng).unwrap();
    let mut toks: Vec<String> = fill(rng, key)
        .split_whitespace()
        .map(str::to_owned)
        .collect();
    while toks.len() < target {
        let filler = *templates::FILLER.choose(rng).unwrap();
        let s = fill(rng, filler);
        toks.extend(s.split_whitespace().map(str::to_owned));
    }
    toks.truncate(target);
    let mut text = toks.join(" ");
    if !text.ends_with(['.', '?', '!']) {
        text.push('.');
    }
    text.to_lowercase()
}

/// Fills every student's comment list. The generator's intended sentiment
/// and comment-level theme are kept as provenance.
pub fn generate_comments(mut cohort: CleanCohort, cfg: &AugmentConfig) -> Result<CleanCohort> {
    cfg.validate()?;
    let n = cohort.len().max(1) as f64;
    let h = cohort.class_histogram();
    let priors = h.map(|c| c as f64 / n);
    let rows = sentiment_rows(cfg.sentiment_mix, cfg.coupling, priors)?;
    let term_days = cfg.term_days();
    for (i, r) in cohort.rows.iter_mut().enumerate() {
        let mut rng = sub_rng(cfg.seed, STREAM_COMMENTS, i as u64);
        let theme = StressTag::ALL[draw(&mut rng, &theme_row(r.label, cfg.coupling))];
        let row = rows[r.label.index()];
        r.comments = (0..cfg.comments_per_student)
            .map(|_| {
                let sentiment = Sentiment::ALL[draw(&mut rng, &row)];
                let comment_theme = if sentiment == Sentiment::Negative { theme } else { StressTag::None };
                let text = compose(&mut rng, cfg, sentiment, comment_theme);
                Comment {
                    text,
                    age_days: rng.random_range(0..=term_days),
                    provenance: Some(CommentProvenance {
                        sentiment,
                        theme: comment_theme,
                    }),
                }
            })
            .collect();
    }
    Ok(cohort)
}

/// Draws `days_since_last_grade` (exponential, label-conditional mean) and
/// re-dates comments. Dropout students' comments skew toward the start of
/// term. Comment order is newest first.
pub fn synthesize_timestamps(mut cohort: CleanCohort, cfg: &AugmentConfig) -> Result<CleanCohort> {
    cfg.validate()?;
    let term_days = cfg.term_days();
    for (i, r) in cohort.rows.iter_mut().enumerate() {
        let mut rng = sub_rng(cfg.seed, STREAM_TIMESTAMPS, i as u64);
        let mean = cfg.grade_gap_means[r.label.index()];
        let gap = Exp::new(1.0 / mean).unwrap().sample(&mut rng);
        r.days_since_last_grade = Some(gap.round().min(365.0) as u32);
        let skew = if r.label == Outcome::Dropout { 0.6 } else { 1.4 };
        for c in r.comments.iter_mut() {
            let u: f64 = rng.random();
            c.age_days = (u.powf(skew) * term_days as f64).round() as u32;
        }
        r.comments.sort_by_key(|c| c.age_days);
    }
    Ok(cohort)
}

/// Moving-average type-token ratio over windows of `window` tokens. Texts
/// shorter than the window use plain TTR; an empty text scores 0.
pub fn mattr(tokens: &[String], window: usize) -> f64 {
    use std::collections::HashMap;
    if tokens.is_empty() {
        return 0.0;
    }
    if tokens.len() <= window {
        let distinct: std::collections::HashSet<&String> = tokens.iter().collect();
        return distinct.len() as f64 / tokens.len() as f64;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &tokens[..window] {
        *counts.entry(t).or_default() += 1;
    }
    let mut total = counts.len() as f64;
    let windows = tokens.len() - window + 1;
    for start in 1..windows {
        let out = tokens[start - 1].as_str();
        let c = counts.get_mut(out).unwrap();
        *c -= 1;
        if *c == 0 {
            counts.remove(out);
        }
        *counts.entry(tokens[start + window - 1].as_str()).or_default() += 1;
        total += counts.len() as f64;
    }
    total / (windows * window) as f64
}

pub const MATTR_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_comments: usize,
    pub n_students: usize,
    pub silent_students: usize,
    pub mean_words: f64,
    pub sd_words: f64,
    /// Realized (negative, neutral, positive) fractions among comments that
    /// carry generator provenance.
    pub sentiment_mix: [f64; 3],
    /// Mean per-comment MATTR (window 50).
    pub mattr: f64,
}

/// Words are whitespace tokens; `sd_words` is the sample standard deviation.
pub fn corpus_stats(cohort: &CleanCohort) -> CorpusStats {
    let mut counts = Vec::new();
    let mut mattrs = Vec::new();
    let mut mix = [0usize; 3];
    let mut silent = 0;
    for r in &cohort.rows {
        if r.comments.is_empty() {
            silent += 1;
        }
        for c in &r.comments {
            counts.push(c.text.split_whitespace().count() as f64);
            mattrs.push(mattr(&words(&c.text), MATTR_WINDOW));
            if let Some(p) = c.provenance {
                mix[p.sentiment.index()] += 1;
            }
        }
    }
    let n = counts.len();
    let mean = if n > 0 { counts.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let sd = if n > 1 {
        (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let labelled: usize = mix.iter().sum();
    CorpusStats {
        n_comments: n,
        n_students: cohort.len(),
        silent_students: silent,
        mean_words: mean,
        sd_words: sd,
        sentiment_mix: mix.map(|m| if labelled > 0 { m as f64 / labelled as f64 } else { 0.0 }),
        mattr: if n > 0 { mattrs.iter().sum::<f64>() / n as f64 } else { 0.0 },
    }
}

impl CorpusStats {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// `generate_comments` followed by `synthesize_timestamps`.
pub fn augment(cohort: CleanCohort, cfg: &AugmentConfig) -> Result<CleanCohort> {
    let cohort = generate_comments(cohort, cfg)?;
    synthesize_timestamps(cohort, cfg)
}
