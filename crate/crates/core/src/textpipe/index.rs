use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embed::{cosine, EmbeddingProvider, EMBEDDING_DIM};
use super::knowledge::KnowledgePassage;
use crate::bundle::Bundle;
use crate::{Error, Result};

/// Exact cosine k-NN over a small passage set.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    passages: Vec<KnowledgePassage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub passage: KnowledgePassage,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub k: usize,
    /// Ordered by similarity descending, ties by ascending passage id.
    pub hits: Vec<RetrievalHit>,
}

impl RetrievalResult {
    pub fn empty(k: usize) -> Self {
        Self { k, hits: Vec::new() }
    }
}

impl VectorIndex {
    /// Embeds every passage with `provider` and indexes them.
    pub fn build(mut passages: Vec<KnowledgePassage>, provider: &dyn EmbeddingProvider) -> Result<Self> {
        let texts: Vec<String> = passages.iter().map(|p| format!("{} {}", p.title, p.text)).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let vectors = provider.embed_batch(&refs)?;
        for (p, v) in passages.iter_mut().zip(vectors) {
            p.embedding = v;
        }
        Self::from_embedded(passages)
    }

    /// Indexes passages whose embeddings are already set.
    pub fn from_embedded(passages: Vec<KnowledgePassage>) -> Result<Self> {
        for p in &passages {
            if p.embedding.len() != EMBEDDING_DIM {
                return Err(Error::WidthMismatch {
                    expected: EMBEDDING_DIM,
                    got: p.embedding.len(),
                });
            }
        }
        Ok(Self { passages })
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn passages(&self) -> &[KnowledgePassage] {
        &self.passages
    }

    pub fn get(&self, id: &str) -> Option<&KnowledgePassage> {
        self.passages.iter().find(|p| p.id == id)
    }

    /// Writes the embedding matrix as a bundle; passage metadata goes in the
    /// JSON header.
    pub fn write_cache(&self, path: &Path, provider_name: &str) -> Result<()> {
        let meta: Vec<serde_json::Value> = self
            .passages
            .iter()
            .map(|p| {
                serde_json::json!({
                    "id": p.id, "source": p.source, "title": p.title, "text": p.text
                })
            })
            .collect();
        let mut b = Bundle::new(
            "retrieval-index",
            serde_json::json!({"provider": provider_name, "dimension": EMBEDDING_DIM, "passages": meta}),
        );
        let flat: Vec<f64> = self.passages.iter().flat_map(|p| p.embedding.iter().copied()).collect();
        b.push("embeddings", &[self.passages.len(), EMBEDDING_DIM], &flat);
        b.write(path)
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let b = Bundle::read(path)?;
        if b.kind != "retrieval-index" {
            return Err(Error::BadBundle(format!("expected retrieval-index, got {}", b.kind)));
        }
        let mut passages: Vec<KnowledgePassage> = serde_json::from_value(b.meta["passages"].clone())?;
        let (shape, flat) = b.tensor("embeddings")?;
        if shape != [passages.len(), EMBEDDING_DIM] {
            return Err(Error::BadBundle("embedding matrix shape".into()));
        }
        for (p, row) in passages.iter_mut().zip(flat.chunks_exact(EMBEDDING_DIM)) {
            p.embedding = row.to_vec();
        }
        Self::from_embedded(passages)
    }
}

/// Exact top-k by cosine similarity, ties broken by ascending passage id.
pub fn retrieve_top_k(index: &VectorIndex, query: &[f64], k: usize) -> Result<RetrievalResult> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if query.len() != EMBEDDING_DIM {
        return Err(Error::WidthMismatch {
            expected: EMBEDDING_DIM,
            got: query.len(),
        });
    }
    let mut scored: Vec<(f64, usize)> = index
        .passages
        .iter()
        .enumerate()
        .map(|(i, p)| (cosine(query, &p.embedding), i))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| index.passages[a.1].id.cmp(&index.passages[b.1].id))
    });
    let hits = scored
        .into_iter()
        .take(k)
        .map(|(similarity, i)| RetrievalHit {
            passage: index.passages[i].clone(),
            similarity,
        })
        .collect();
    Ok(RetrievalResult { k, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textpipe::{KnowledgeBase, PassageSource, ReferenceProvider};

    fn passage(id: &str, v: Vec<f64>) -> KnowledgePassage {
        KnowledgePassage {
            id: id.into(),
            source: PassageSource::Faq,
            title: id.into(),
            text: "t".into(),
            embedding: v,
        }
    }

    fn axis(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; EMBEDDING_DIM];
        v[i] = 1.0;
        v
    }

    #[test]
    fn self_query_comes_first() {
        let provider = ReferenceProvider::default();
        let kb = KnowledgeBase::builtin().unwrap();
        let index = VectorIndex::build(kb.passages, &provider).unwrap();
        for p in index.passages() {
            let r = retrieve_top_k(&index, &p.embedding, 3).unwrap();
            assert_eq!(r.hits[0].passage.id, p.id);
            assert!((r.hits[0].similarity - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn k_larger_than_index() {
        let index = VectorIndex::from_embedded(vec![passage("a", axis(0)), passage("b", axis(1))]).unwrap();
        let r = retrieve_top_k(&index, &axis(0), 3).unwrap();
        assert_eq!(r.hits.len(), 2);
    }

    #[test]
    fn ties_break_by_id() {
        let index = VectorIndex::from_embedded(vec![
            passage("c", axis(1)),
            passage("a", axis(1)),
            passage("b", axis(1)),
        ])
        .unwrap();
        let r = retrieve_top_k(&index, &axis(1), 3).unwrap();
        let ids: Vec<&str> = r.hits.iter().map(|h| h.passage.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn empty_index_errors() {
        let index = VectorIndex::from_embedded(vec![]).unwrap();
        assert!(matches!(retrieve_top_k(&index, &axis(0), 3), Err(Error::EmptyIndex)));
    }

    #[test]
    fn cache_roundtrip() {
        let provider = ReferenceProvider::default();
        let kb = KnowledgeBase::builtin().unwrap();
        let index = VectorIndex::build(kb.passages, &provider).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.bin");
        index.write_cache(&path, provider.name()).unwrap();
        let back = VectorIndex::read_cache(&path).unwrap();
        assert_eq!(back.len(), index.len());
        let q = &index.passages()[4].embedding;
        let a = retrieve_top_k(&index, q, 3).unwrap();
        let b = retrieve_top_k(&back, q, 3).unwrap();
        let ids = |r: &RetrievalResult| r.hits.iter().map(|h| h.passage.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
    }
}
