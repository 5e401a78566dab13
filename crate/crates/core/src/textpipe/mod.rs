//! Retrieval-augmented comment processing: embed a comment, fetch the
//! closest knowledge-base passages, build a length-capped prompt and tag
//! sentiment and academic stress.

mod affect;
mod builtin_kb;
mod embed;
mod index;
mod knowledge;
mod prompt;

use serde::{Deserialize, Serialize};

pub use affect::{AffectClassifier, AffectLabels, LexiconClassifier, GROUNDING_PROBES, PASSAGE_WEIGHT};
pub use embed::{
    read_exchange_responses, write_exchange_requests, CommandProvider, EmbeddingProvider,
    ExchangeRequest, ExchangeResponse, ReferenceProvider, EMBEDDING_DIM,
};
pub use index::{retrieve_top_k, RetrievalHit, RetrievalResult, VectorIndex};
pub use knowledge::{KnowledgeBase, KnowledgePassage, PassageSource};
pub use prompt::{build_prompt, Prompt, PromptPassage, PROMPT_TOKEN_CAP};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressTag {
    Isolation = 0,
    Workload = 1,
    Confusion = 2,
    None = 3,
}

impl StressTag {
    pub const ALL: [StressTag; 4] = [
        StressTag::Isolation,
        StressTag::Workload,
        StressTag::Confusion,
        StressTag::None,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StressTag::Isolation => "isolation",
            StressTag::Workload => "workload",
            StressTag::Confusion => "confusion",
            StressTag::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s.trim().to_ascii_lowercase())
    }
}

/// Lower-cased word tokens with apostrophes folded (`don't` -> `dont`).
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Everything the text branch derives from one comment.
#[derive(Debug, Clone)]
pub struct CommentAnalysis {
    /// Unit vector, or all zeros for a comment with no tokens.
    pub embedding: Vec<f64>,
    pub retrieval: RetrievalResult,
    pub prompt: Prompt,
    pub affect: AffectLabels,
}

/// Embedding provider, passage index and affect classifier bundled together.
pub struct TextPipeline {
    pub provider: Box<dyn EmbeddingProvider>,
    pub index: VectorIndex,
    pub classifier: Box<dyn AffectClassifier>,
    pub top_k: usize,
    pub token_cap: usize,
    /// When false, affect is classified from the comment alone.
    pub use_retrieval: bool,
}

impl TextPipeline {
    /// Reference provider over the bundled knowledge base.
    pub fn reference() -> Result<Self> {
        let provider = ReferenceProvider::default();
        let kb = KnowledgeBase::builtin()?;
        let index = VectorIndex::build(kb.passages, &provider)?;
        Ok(Self {
            provider: Box::new(provider),
            index,
            classifier: Box::new(LexiconClassifier::default()),
            top_k: 3,
            token_cap: PROMPT_TOKEN_CAP,
            use_retrieval: true,
        })
    }

    pub fn analyze(&self, comment: &str) -> Result<CommentAnalysis> {
        let embedding = self.provider.embed(comment)?;
        let silent = embedding.iter().all(|v| *v == 0.0);
        let retrieval = if silent || self.index.is_empty() {
            RetrievalResult::empty(self.top_k)
        } else {
            retrieve_top_k(&self.index, &embedding, self.top_k)?
        };
        let grounding = if self.use_retrieval {
            retrieval.clone()
        } else {
            RetrievalResult::empty(self.top_k)
        };
        let prompt = build_prompt(comment, &grounding, self.token_cap);
        let affect = AffectLabels::from_probs(
            self.classifier.sentiment(&prompt),
            self.classifier.stress(&prompt),
        );
        Ok(CommentAnalysis {
            embedding,
            retrieval,
            prompt,
            affect,
        })
    }
}
