use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::builtin_kb;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassageSource {
    Faq,
    StudyGuide,
    ForumExemplar,
    Policy,
}

impl PassageSource {
    pub fn label(self) -> &'static str {
        match self {
            PassageSource::Faq => "FAQ",
            PassageSource::StudyGuide => "study guide",
            PassageSource::ForumExemplar => "forum",
            PassageSource::Policy => "policy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgePassage {
    pub id: String,
    pub source: PassageSource,
    pub title: String,
    pub text: String,
    /// Filled in when the passage is indexed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    source: PassageSource,
    title: String,
    file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    version: String,
    passages: Vec<ManifestEntry>,
}

/// Versioned set of pedagogical passages.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub version: String,
    pub passages: Vec<KnowledgePassage>,
}

impl KnowledgeBase {
    /// Loads `manifest.json` and the passage files it names from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        Self::from_manifest(manifest, |file| Ok(fs::read_to_string(dir.join(file))?))
    }

    /// The knowledge base compiled into the crate.
    pub fn builtin() -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(builtin_kb::MANIFEST)?;
        Self::from_manifest(manifest, |file| {
            builtin_kb::FILES
                .iter()
                .find(|(name, _)| *name == file)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::InvalidConfig(format!("builtin passage {file} missing")))
        })
    }

    fn from_manifest(manifest: Manifest, read: impl Fn(&str) -> Result<String>) -> Result<Self> {
        let mut passages = Vec::with_capacity(manifest.passages.len());
        for e in manifest.passages {
            let text = read(&e.file)?.trim().to_string();
            if text.is_empty() {
                return Err(Error::InvalidConfig(format!("passage {} is empty", e.id)));
            }
            passages.push(KnowledgePassage {
                id: e.id,
                source: e.source,
                title: e.title,
                text,
                embedding: Vec::new(),
            });
        }
        Ok(Self {
            version: manifest.version,
            passages,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_matches_directory_copy() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("knowledge_base");
        let a = KnowledgeBase::load_dir(&dir).unwrap();
        let b = KnowledgeBase::builtin().unwrap();
        assert_eq!(a.version, b.version);
        assert_eq!(a.passages, b.passages);
        assert!(b.passages.iter().any(|p| p.title == "Peer study groups"));
    }
}
