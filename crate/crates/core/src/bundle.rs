//! Versioned artifact container: JSON header followed by a little-endian
//! `f32` blob.
//!
//! ```text
//! b"TRIADBN1" | u32 LE header length | header JSON | f32 LE tensor data
//! ```
//!
//! The header names each tensor with its shape and element offset into the
//! blob. Encoders, PCA models, classifiers and the retrieval index cache all
//! use this layout.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"TRIADBN1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    kind: String,
    meta: serde_json::Value,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub kind: String,
    pub meta: serde_json::Value,
    entries: Vec<TensorEntry>,
    data: Vec<f32>,
}

impl Bundle {
    pub fn new(kind: impl Into<String>, meta: serde_json::Value) -> Self {
        Self {
            kind: kind.into(),
            meta,
            entries: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, shape: &[usize], values: &[f64]) {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        self.entries.push(TensorEntry {
            name: name.into(),
            shape: shape.to_vec(),
            offset: self.data.len(),
        });
        self.data.extend(values.iter().map(|&v| v as f32));
    }

    pub fn tensor(&self, name: &str) -> Result<(Vec<usize>, Vec<f64>)> {
        let e = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::BadBundle(format!("missing tensor {name}")))?;
        let len: usize = e.shape.iter().product();
        let slice = self
            .data
            .get(e.offset..e.offset + len)
            .ok_or_else(|| Error::BadBundle(format!("tensor {name} out of range")))?;
        Ok((e.shape.clone(), slice.iter().map(|&v| f64::from(v)).collect()))
    }

    pub fn tensor_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            format_version: FORMAT_VERSION,
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            tensors: self.entries.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(12 + json.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::BadBundle("bad magic".into()));
        }
        let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = bytes
            .get(12..12 + hlen)
            .ok_or_else(|| Error::BadBundle("truncated header".into()))?;
        let header: Header = serde_json::from_slice(body)?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::BadBundle(format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        let blob = &bytes[12 + hlen..];
        if !blob.len().is_multiple_of(4) {
            return Err(Error::BadBundle("blob length not a multiple of 4".into()));
        }
        let data = blob
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            kind: header.kind,
            meta: header.meta,
            entries: header.tensors,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    /// Like [`Bundle::read`], but a missing file is reported as
    /// `ModelMissing`.
    pub fn read_model(path: &Path) -> Result<Self> {
        Self::read(path).map_err(|e| match e {
            Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                Error::ModelMissing(path.display().to_string())
            }
            other => other,
        })
    }

    /// Fails with `BadBundle` unless the kind matches.
    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::BadBundle(format!("expected {kind}, found {}", self.kind)))
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_f32_values() {
        let mut b = Bundle::new("test", serde_json::json!({"k": 3}));
        b.push("w", &[2, 2], &[1.0, -2.5, 0.1, 3.0]);
        b.push("b", &[1], &[7.0]);
        let back = Bundle::from_bytes(&b.to_bytes().unwrap()).unwrap();
        assert_eq!(back.kind, "test");
        assert_eq!(back.meta["k"], 3);
        let (shape, w) = back.tensor("w").unwrap();
        assert_eq!(shape, vec![2, 2]);
        assert_eq!(w[1], -2.5);
        assert_eq!(w[2], f64::from(0.1f32));
        assert!(back.tensor("missing").is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Bundle::from_bytes(b"not a bundle").is_err());
    }

    #[test]
    fn blob_is_little_endian_f32() {
        let mut b = Bundle::new("x", serde_json::Value::Null);
        b.push("v", &[1], &[1.0]);
        let bytes = b.to_bytes().unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &1.0f32.to_le_bytes());
    }
}
