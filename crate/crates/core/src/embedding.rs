//! Embedding tables and the JSONL interchange format shared with the
//! external encoder.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Key prefix for document-context vectors.
pub const DOC_KEY_PREFIX: &str = "doc:";

pub fn doc_key(doc_id: &str) -> String {
    format!("{DOC_KEY_PREFIX}{doc_id}")
}

/// Fixed-dimension map from key to finite vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    model: String,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, model: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidEmbedding("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            model: model.into(),
            entries: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidEmbedding(format!("non-finite component for key {key:?}")));
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Header { dim: usize, model: String },
    Vector { key: String, vector: Vec<f64> },
}

/// Parse the interchange format: a header line, then one vector per line.
pub fn parse_embeddings(text: &str, origin: &str) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|source| Error::Parse {
            path: origin.to_owned(),
            line: i + 1,
            source,
        })?;
        match (record, table.as_mut()) {
            (Record::Header { dim, model }, None) => table = Some(EmbeddingTable::new(dim, model)?),
            (Record::Header { .. }, Some(_)) => {
                return Err(Error::InvalidEmbedding(format!("{origin}:{}: second header", i + 1)))
            }
            (Record::Vector { .. }, None) => {
                return Err(Error::InvalidEmbedding(format!("{origin}: vector before header")))
            }
            (Record::Vector { key, vector }, Some(t)) => t.insert(key, vector)?,
        }
    }
    table.ok_or_else(|| Error::InvalidEmbedding(format!("{origin}: missing header")))
}

/// Serialize with keys sorted. Components use shortest round-trip decimals.
pub fn embeddings_to_jsonl(table: &EmbeddingTable) -> String {
    let mut out = serde_json::to_string(&Record::Header {
        dim: table.dim,
        model: table.model.clone(),
    })
    .expect("header serializes");
    out.push('\n');
    let mut keys: Vec<&String> = table.entries.keys().collect();
    keys.sort();
    for key in keys {
        let line = serde_json::to_string(&Record::Vector {
            key: key.clone(),
            vector: table.entries[key].clone(),
        })
        .expect("vector serializes");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, &path.display().to_string())
}

pub fn write_embeddings(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, embeddings_to_jsonl(table)).map_err(|e| Error::io(path, e))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic character-trigram embedder used when no encoder output is
/// available. The key is padded with STX/ETX markers so short keys still
/// yield trigrams; each trigram adds ±1 to one of `dim` buckets. The result is
/// unit-normalized (the empty key maps to the zero vector).
pub fn hash_embed(key: &str, dim: usize) -> Vec<f64> {
    assert!(dim >= 8, "hash_embed needs dim >= 8");
    let padded: Vec<char> = std::iter::once('\u{2}')
        .chain(key.chars())
        .chain(std::iter::once('\u{3}'))
        .collect();
    let mut v = vec![0.0; dim];
    let mut buf = [0u8; 12];
    for w in padded.windows(3) {
        let mut len = 0;
        for c in w {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        let h = fnv1a(&buf[..len]);
        let bucket = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[bucket] += sign;
    }
    crate::car::unit_normalize(&v)
}
