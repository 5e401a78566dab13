use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::words;
use crate::util::fnv1a64;
use crate::{Error, Result};

pub const EMBEDDING_DIM: usize = 384;

/// Text-to-vector provider. Implementations must return unit-norm vectors
/// of [`EMBEDDING_DIM`] entries, or an all-zero vector for text without
/// tokens.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize {
        EMBEDDING_DIM
    }

    fn deterministic(&self) -> bool;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.embed_batch(&[text])?.pop().unwrap_or_default())
    }
}

/// Concept groups shared by near-synonyms. Words in the same group emit a
/// common feature, so paraphrases land close together.
const CONCEPTS: &[(&str, &[&str])] = &[
    (
        "workload",
        &[
            "workload", "deadline", "deadlines", "pressure", "overwhelmed", "overload",
            "overloaded", "assignments", "busy", "drowning", "behind", "juggling", "schedule",
        ],
    ),
    (
        "stress",
        &[
            "stress", "stressed", "stressful", "anxiety", "anxious", "worried", "worry", "panic",
            "panicked", "nervous", "tense",
        ],
    ),
    (
        "isolation",
        &[
            "isolated", "isolation", "alone", "lonely", "loneliness", "nobody", "disconnected",
            "excluded", "ignored", "invisible", "peer", "peers", "classmates", "mentor",
        ],
    ),
    (
        "confusion",
        &[
            "confused", "confusing", "confusion", "lost", "unclear", "understand", "unsure",
            "puzzled", "clueless", "baffled", "sense", "explanation",
        ],
    ),
    (
        "assessment",
        &[
            "quiz", "quizzes", "exam", "exams", "test", "grade", "grades", "mark", "marks",
            "failed", "failing", "fail", "retake", "resubmission", "appeal",
        ],
    ),
    (
        "platform",
        &[
            "portal", "platform", "upload", "uploads", "login", "outage", "down", "broken",
            "error", "locked", "access", "lab", "ticket",
        ],
    ),
    (
        "withdrawal",
        &["withdraw", "withdrawing", "withdrawal", "quit", "quitting", "dropout", "leave", "pause"],
    ),
];

/// Deterministic reference embedder: signed feature hashing of word
/// unigrams, boundary-marked character trigrams and concept features into
/// 384 dimensions, then L2 normalisation.
#[derive(Debug, Clone)]
pub struct ReferenceProvider {
    seed: u64,
    concept_of: HashMap<&'static str, &'static str>,
}

impl Default for ReferenceProvider {
    fn default() -> Self {
        Self::new(0x7472_6961_6400)
    }
}

impl ReferenceProvider {
    pub fn new(seed: u64) -> Self {
        let mut concept_of = HashMap::new();
        for (concept, members) in CONCEPTS {
            for m in *members {
                concept_of.insert(*m, *concept);
            }
        }
        Self { seed, concept_of }
    }

    fn add(&self, v: &mut [f64], feature: &str, weight: f64) {
        let mut bytes = self.seed.to_le_bytes().to_vec();
        bytes.extend_from_slice(feature.as_bytes());
        let h = fnv1a64(&bytes);
        let slot = (h % EMBEDDING_DIM as u64) as usize;
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        v[slot] += sign * weight;
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; EMBEDDING_DIM];
        for w in words(text) {
            self.add(&mut v, &format!("w:{w}"), 1.0);
            let marked: Vec<char> = format!("^{w}$").chars().collect();
            if marked.len() >= 3 {
                let n = (marked.len() - 2) as f64;
                for tri in marked.windows(3) {
                    let g: String = tri.iter().collect();
                    self.add(&mut v, &format!("c:{g}"), 0.8 / n.sqrt());
                }
            }
            if let Some(concept) = self.concept_of.get(w.as_str()) {
                self.add(&mut v, &format!("k:{concept}"), 1.5);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl EmbeddingProvider for ReferenceProvider {
    fn name(&self) -> &str {
        "reference-hashed-ngram-384"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// One request line of the provider exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeRequest {
    pub id: String,
    pub text: String,
}

/// One response line of the provider exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeResponse {
    pub id: String,
    pub vector: Vec<f64>,
}

pub fn write_exchange_requests<W: Write>(mut w: W, reqs: &[ExchangeRequest]) -> Result<()> {
    for r in reqs {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_exchange_responses<R: BufRead>(r: R) -> Result<Vec<ExchangeResponse>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// External embedder driven over stdin/stdout: the child process reads
/// `{id, text}` JSON lines and answers with `{id, vector}` JSON lines.
#[derive(Debug, Clone)]
pub struct CommandProvider {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandProvider {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }
}

impl EmbeddingProvider for CommandProvider {
    fn name(&self) -> &str {
        &self.program
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let unavailable = |e: &dyn std::fmt::Display| Error::ProviderUnavailable(format!("{}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| unavailable(&e))?;
        let reqs: Vec<ExchangeRequest> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| ExchangeRequest {
                id: i.to_string(),
                text: t.to_string(),
            })
            .collect();
        {
            let stdin = child.stdin.take().ok_or_else(|| unavailable(&"no stdin"))?;
            write_exchange_requests(stdin, &reqs).map_err(|e| unavailable(&e))?;
        }
        let stdout = child.stdout.take().ok_or_else(|| unavailable(&"no stdout"))?;
        let responses = read_exchange_responses(BufReader::new(stdout)).map_err(|e| unavailable(&e))?;
        let status = child.wait().map_err(|e| unavailable(&e))?;
        if !status.success() {
            return Err(unavailable(&format!("exit status {status}")));
        }
        let by_id: HashMap<String, Vec<f64>> =
            responses.into_iter().map(|r| (r.id, r.vector)).collect();
        reqs.iter()
            .map(|r| {
                let mut v = by_id
                    .get(&r.id)
                    .cloned()
                    .ok_or_else(|| unavailable(&format!("no vector for id {}", r.id)))?;
                if v.len() != EMBEDDING_DIM {
                    return Err(Error::WidthMismatch {
                        expected: EMBEDDING_DIM,
                        got: v.len(),
                    });
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|x| *x /= norm);
                }
                Ok(v)
            })
            .collect()
    }
}

pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vectors_are_unit_norm_and_deterministic() {
        let p = ReferenceProvider::default();
        for text in ["a", "workload anxiety", "I feel isolated in module 3", "x y z 1 2 3"] {
            let v = p.embed(text).unwrap();
            assert_eq!(v.len(), EMBEDDING_DIM);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
            assert_eq!(v, p.embed(text).unwrap());
        }
    }

    #[test]
    fn empty_text_gives_zero_sentinel() {
        let v = ReferenceProvider::default().embed("  !! ").unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn paraphrase_is_closer_than_unrelated_text() {
        let p = ReferenceProvider::default();
        let a = p.embed("workload anxiety").unwrap();
        let b = p.embed("deadline pressure stress").unwrap();
        let c = p.embed("photosynthesis lab report").unwrap();
        let ab = cosine(&a, &b);
        let ac = cosine(&a, &c);
        assert!(ab > ac, "cos(a,b)={ab} cos(a,c)={ac}");
    }

    #[test]
    fn missing_command_is_unavailable() {
        let p = CommandProvider::new("/nonexistent/embedder-binary", vec![]);
        assert!(matches!(p.embed("hello"), Err(Error::ProviderUnavailable(_))));
    }

    #[test]
    fn exchange_format_lines() {
        let mut buf = Vec::new();
        write_exchange_requests(
            &mut buf,
            &[ExchangeRequest {
                id: "7".into(),
                text: "hi".into(),
            }],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"id\":\"7\",\"text\":\"hi\"}\n");
        let parsed = read_exchange_responses("{\"id\":\"7\",\"vector\":[0.5,0.5]}\n".as_bytes()).unwrap();
        assert_eq!(parsed[0].vector, vec![0.5, 0.5]);
    }
}
