use serde::{Deserialize, Serialize};

use super::index::RetrievalResult;

pub const PROMPT_TOKEN_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPassage {
    pub id: String,
    pub text: String,
    pub similarity: f64,
    pub truncated: bool,
}

/// Comment followed by its supporting passages, capped at a whitespace-token
/// budget. The comment is never shortened while any passage text remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub comment: String,
    pub passages: Vec<PromptPassage>,
    pub token_count: usize,
    pub comment_truncated: bool,
}

impl Prompt {
    /// `comment ‖ P1 ‖ P2 ‖ P3`, space separated.
    pub fn render(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(1 + self.passages.len());
        if !self.comment.is_empty() {
            parts.push(&self.comment);
        }
        parts.extend(self.passages.iter().map(|p| p.text.as_str()));
        parts.join(" ")
    }
}

fn take_tokens(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

/// Lays out the comment then passages in rank order; whatever does not fit
/// under `cap` is cut from the lowest-ranked passage first.
pub fn build_prompt(comment: &str, retrieval: &RetrievalResult, cap: usize) -> Prompt {
    let comment_tokens = comment.split_whitespace().count();
    if comment_tokens > cap {
        log::warn!("comment has {comment_tokens} tokens, truncating to {cap}");
        return Prompt {
            comment: take_tokens(comment, cap),
            passages: Vec::new(),
            token_count: cap,
            comment_truncated: true,
        };
    }
    let mut budget = cap - comment_tokens;
    let mut passages = Vec::with_capacity(retrieval.hits.len());
    for hit in &retrieval.hits {
        if budget == 0 {
            break;
        }
        let n = hit.passage.text.split_whitespace().count();
        let keep = n.min(budget);
        budget -= keep;
        passages.push(PromptPassage {
            id: hit.passage.id.clone(),
            text: take_tokens(&hit.passage.text, keep),
            similarity: hit.similarity,
            truncated: keep < n,
        });
    }
    Prompt {
        comment: comment.split_whitespace().collect::<Vec<_>>().join(" "),
        token_count: cap - budget,
        passages,
        comment_truncated: false,
    }
}
