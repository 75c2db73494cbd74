//! Sentence vectors, the provider contract and persistent embedding stores.
//!
//! Vectors are stored as `f32`; every reduction (means, dot products, norms)
//! accumulates in `f64`.
//!
//! # Binary store layout
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic      b"SDRE"
//! version    u16            (currently 1)
//! dimension  u32
//! doc count  u32
//! per document:
//!     id length u32, id bytes (UTF-8)
//!     paragraph count u32
//!     sentence count u32      (one per paragraph)
//!     f32 × dimension         (one vector per sentence, in order)
//! optional trailer:
//!     b"CLSV", then f32 × dimension per document, in document order
//! ```
//!
//! A JSONL debug store is also understood: one object per document,
//! `{"id": str, "paragraphs": [[[f32, ...], ...], ...], "cls": [f32, ...]?}`.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

pub const STORE_MAGIC: &[u8; 4] = b"SDRE";
pub const STORE_VERSION: u16 = 1;
const CLS_TAG: &[u8; 4] = b"CLSV";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("cannot pool an empty list of vectors")]
    EmptyPool,
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("vector has no components")]
    EmptyVector,
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, found {found}{context}")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("non-finite value at component {component}{context}")]
    NonFinite { component: usize, context: String },
    #[error("store truncated: needed {needed} bytes at offset {offset}, file has {len}")]
    Truncated {
        offset: usize,
        needed: usize,
        len: usize,
    },
    #[error("not an embedding store (bad magic)")]
    BadMagic,
    #[error("unsupported store version {0}")]
    UnknownVersion(u16),
    #[error("malformed store: {0}")]
    Malformed(String),
    #[error("store does not match corpus: {0}")]
    ShapeMismatch(String),
    #[error(
        "no stored vector for document {document:?} paragraph {paragraph} sentence {sentence}"
    )]
    MissingVector {
        document: String,
        paragraph: usize,
        sentence: usize,
    },
    #[error("provider failed on document {document:?} paragraph {paragraph} sentence {sentence}: {source}")]
    Provider {
        document: String,
        paragraph: usize,
        sentence: usize,
        #[source]
        source: Box<EmbeddingError>,
    },
    #[error("{0}")]
    Other(String),
}

/// A finite, non-empty `f32` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f32>);

impl Vector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::EmptyVector);
        }
        if let Some(component) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                component,
                context: String::new(),
            });
        }
        Ok(Vector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Every component multiplied by `factor`, rounded back to `f32`.
    pub fn scaled(&self, factor: f32) -> Result<Vector, EmbeddingError> {
        Vector::new(self.0.iter().map(|v| v * factor).collect())
    }
}

impl TryFrom<Vec<f32>> for Vector {
    type Error = EmbeddingError;

    fn try_from(values: Vec<f32>) -> Result<Self, Self::Error> {
        Vector::new(values)
    }
}

/// Component-wise arithmetic mean.
pub fn mean_pool(vectors: &[Vector]) -> Result<Vector, EmbeddingError> {
    let first = vectors.first().ok_or(EmbeddingError::EmptyPool)?;
    let d = first.dim();
    let mut acc = vec![0f64; d];
    for (i, v) in vectors.iter().enumerate() {
        if v.dim() != d {
            return Err(EmbeddingError::DimensionMismatch {
                expected: d,
                found: v.dim(),
                context: format!(" (pooled vector {i})"),
            });
        }
        for (a, &x) in acc.iter_mut().zip(v.as_slice()) {
            *a += x as f64;
        }
    }
    let n = vectors.len() as f64;
    Vector::new(acc.into_iter().map(|a| (a / n) as f32).collect())
}

/// Whitespace tokenization shared by the hash provider and the toy model.
///
/// Tokens are lowercased and stripped of leading/trailing non-alphanumeric
/// characters; a token that would become empty is kept verbatim.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            let stripped = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if stripped.is_empty() {
                raw.to_lowercase()
            } else {
                stripped.to_lowercase()
            }
        })
        .collect()
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn token_direction(token: &str, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(seed, token.as_bytes()));
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Deterministic bag-of-tokens embedding: every token maps to a seeded
/// pseudo-random unit vector; the sentence vector is their mean, L2-normalized.
pub fn hash_embed(text: &str, d: usize, seed: u64) -> Result<Vector, EmbeddingError> {
    if d < 2 {
        return Err(EmbeddingError::DimensionTooSmall { min: 2, got: d });
    }
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(EmbeddingError::EmptyText);
    }
    let mut acc = vec![0f64; d];
    for t in &tokens {
        for (a, x) in acc.iter_mut().zip(token_direction(t, d, seed)) {
            *a += x;
        }
    }
    let mut norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        // Tokens cancelled out exactly; fall back to the first token's direction.
        acc = token_direction(&tokens[0], d, seed);
        norm = 1.0;
    }
    Vector::new(acc.into_iter().map(|x| (x / norm) as f32).collect())
}

/// Coordinates of a sentence inside a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceKey<'a> {
    pub document: &'a str,
    pub paragraph: usize,
    pub sentence: usize,
}

/// Anything that maps a sentence to a vector of fixed dimension.
pub trait EmbeddingProvider: Sync {
    fn dimension(&self) -> usize;

    fn embed(&self, key: SentenceKey<'_>, text: &str) -> Result<Vector, EmbeddingError>;

    /// Providers that return `false` are never called from two threads at once.
    fn concurrency_safe(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dimension: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        HashEmbedder { dimension, seed }
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, _key: SentenceKey<'_>, text: &str) -> Result<Vector, EmbeddingError> {
        hash_embed(text, self.dimension, self.seed)
    }
}

/// Serves vectors out of a previously written store, addressed by sentence
/// coordinates.
#[derive(Debug, Clone)]
pub struct StoreProvider {
    store: EmbeddedCorpus,
}

impl StoreProvider {
    pub fn new(store: EmbeddedCorpus) -> Self {
        StoreProvider { store }
    }

    pub fn open(path: &Path) -> Result<Self, EmbeddingError> {
        Ok(StoreProvider::new(load_embeddings(path)?))
    }
}

impl EmbeddingProvider for StoreProvider {
    fn dimension(&self) -> usize {
        self.store.dimension()
    }

    fn embed(&self, key: SentenceKey<'_>, _text: &str) -> Result<Vector, EmbeddingError> {
        self.store
            .get(key.document)
            .and_then(|d| d.paragraphs.get(key.paragraph))
            .and_then(|p| p.get(key.sentence))
            .cloned()
            .ok_or_else(|| EmbeddingError::MissingVector {
                document: key.document.to_string(),
                paragraph: key.paragraph,
                sentence: key.sentence,
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDocument {
    pub id: String,
    /// One vector per sentence, grouped by paragraph.
    pub paragraphs: Vec<Vec<Vector>>,
    pub cls: Option<Vector>,
}

impl EmbeddedDocument {
    pub fn sentence_vectors(&self) -> impl Iterator<Item = &Vector> {
        self.paragraphs.iter().flatten()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.paragraphs.iter().map(Vec::len).collect()
    }
}

/// Per-sentence vectors for a whole corpus, preserving paragraph structure.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCorpus {
    dimension: usize,
    documents: Vec<EmbeddedDocument>,
    index: HashMap<String, usize>,
}

impl EmbeddedCorpus {
    pub fn new(dimension: usize, documents: Vec<EmbeddedDocument>) -> Result<Self, EmbeddingError> {
        if dimension == 0 {
            return Err(EmbeddingError::DimensionTooSmall { min: 1, got: 0 });
        }
        let mut index = HashMap::with_capacity(documents.len());
        for (pos, doc) in documents.iter().enumerate() {
            if index.insert(doc.id.clone(), pos).is_some() {
                return Err(EmbeddingError::Malformed(format!(
                    "duplicate document id {:?}",
                    doc.id
                )));
            }
            if doc.paragraphs.is_empty() {
                return Err(EmbeddingError::Malformed(format!(
                    "document {:?} has no paragraphs",
                    doc.id
                )));
            }
            for (pi, para) in doc.paragraphs.iter().enumerate() {
                if para.is_empty() {
                    return Err(EmbeddingError::Malformed(format!(
                        "document {:?} paragraph {pi} has no sentences",
                        doc.id
                    )));
                }
                for (si, v) in para.iter().enumerate() {
                    if v.dim() != dimension {
                        return Err(EmbeddingError::DimensionMismatch {
                            expected: dimension,
                            found: v.dim(),
                            context: format!(
                                " (document {:?} paragraph {pi} sentence {si})",
                                doc.id
                            ),
                        });
                    }
                }
            }
            if let Some(cls) = &doc.cls {
                if cls.dim() != dimension {
                    return Err(EmbeddingError::DimensionMismatch {
                        expected: dimension,
                        found: cls.dim(),
                        context: format!(" (cls vector of {:?})", doc.id),
                    });
                }
            }
        }
        Ok(EmbeddedCorpus {
            dimension,
            documents,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn documents(&self) -> &[EmbeddedDocument] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddedDocument> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    /// True when every document carries a classifier-token vector.
    pub fn has_cls(&self) -> bool {
        self.documents.iter().all(|d| d.cls.is_some())
    }

    /// Checks that this store has exactly the documents of `corpus`, with the
    /// same paragraph and sentence counts.
    pub fn check_shape(&self, corpus: &Corpus) -> Result<(), EmbeddingError> {
        if self.len() != corpus.len() {
            return Err(EmbeddingError::ShapeMismatch(format!(
                "store has {} documents, corpus has {}",
                self.len(),
                corpus.len()
            )));
        }
        for doc in corpus.documents() {
            let emb = self.get(&doc.id).ok_or_else(|| {
                EmbeddingError::ShapeMismatch(format!("document {:?} missing from store", doc.id))
            })?;
            let expected: Vec<usize> = doc.paragraphs.iter().map(|p| p.sentences.len()).collect();
            let found = emb.shape();
            if expected != found {
                return Err(EmbeddingError::ShapeMismatch(format!(
                    "document {:?}: corpus sentence counts {expected:?}, store {found:?}",
                    doc.id
                )));
            }
        }
        Ok(())
    }
}

/// Embeds every sentence of `corpus`, calling the provider exactly once per
/// sentence. With `workers > 1` calls run on a thread pool; results are
/// identical for any worker count.
pub fn embed_corpus<P: EmbeddingProvider + ?Sized>(
    provider: &P,
    corpus: &Corpus,
    workers: usize,
) -> Result<EmbeddedCorpus, EmbeddingError> {
    let dimension = provider.dimension();
    let jobs: Vec<(SentenceKey<'_>, &str)> = corpus
        .documents()
        .iter()
        .flat_map(|doc| {
            doc.paragraphs.iter().enumerate().flat_map(move |(pi, p)| {
                p.sentences.iter().enumerate().map(move |(si, s)| {
                    (
                        SentenceKey {
                            document: &doc.id,
                            paragraph: pi,
                            sentence: si,
                        },
                        s.text.as_str(),
                    )
                })
            })
        })
        .collect();

    let gate = Mutex::new(());
    let serialize = !provider.concurrency_safe();
    let call = |(key, text): &(SentenceKey<'_>, &str)| -> Result<Vector, EmbeddingError> {
        let _guard = serialize.then(|| gate.lock().unwrap_or_else(|e| e.into_inner()));
        let wrap = |source: EmbeddingError| EmbeddingError::Provider {
            document: key.document.to_string(),
            paragraph: key.paragraph,
            sentence: key.sentence,
            source: Box::new(source),
        };
        let v = provider.embed(*key, text).map_err(wrap)?;
        if v.dim() != dimension {
            return Err(wrap(EmbeddingError::DimensionMismatch {
                expected: dimension,
                found: v.dim(),
                context: String::new(),
            }));
        }
        Ok(v)
    };

    let results: Vec<Result<Vector, EmbeddingError>> = if workers <= 1 {
        jobs.iter().map(call).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| EmbeddingError::Other(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(call).collect())
    };

    let mut vectors = results.into_iter();
    let mut documents = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let mut paragraphs = Vec::with_capacity(doc.paragraphs.len());
        for p in &doc.paragraphs {
            let mut row = Vec::with_capacity(p.sentences.len());
            for _ in &p.sentences {
                row.push(vectors.next().expect("one result per sentence")?);
            }
            paragraphs.push(row);
        }
        documents.push(EmbeddedDocument {
            id: doc.id.clone(),
            paragraphs,
            cls: None,
        });
    }
    EmbeddedCorpus::new(dimension, documents)
}

/// Encodes a store in the binary layout described in the module docs.
pub fn encode_store(ec: &EmbeddedCorpus) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STORE_MAGIC);
    out.extend_from_slice(&STORE_VERSION.to_le_bytes());
    out.extend_from_slice(&(ec.dimension as u32).to_le_bytes());
    out.extend_from_slice(&(ec.documents.len() as u32).to_le_bytes());
    for doc in &ec.documents {
        out.extend_from_slice(&(doc.id.len() as u32).to_le_bytes());
        out.extend_from_slice(doc.id.as_bytes());
        out.extend_from_slice(&(doc.paragraphs.len() as u32).to_le_bytes());
        for p in &doc.paragraphs {
            out.extend_from_slice(&(p.len() as u32).to_le_bytes());
        }
        for v in doc.sentence_vectors() {
            for x in v.as_slice() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    if ec.has_cls() && !ec.documents.is_empty() {
        out.extend_from_slice(CLS_TAG);
        for doc in &ec.documents {
            for x in doc.cls.as_ref().expect("has_cls").as_slice() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(EmbeddingError::Truncated {
                offset: self.pos,
                needed: n,
                len: self.bytes.len(),
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16, EmbeddingError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self) -> Result<usize, EmbeddingError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn vector(&mut self, d: usize, context: impl Fn() -> String) -> Result<Vector, EmbeddingError> {
        let raw = self.take(
            d.checked_mul(4)
                .ok_or_else(|| EmbeddingError::Malformed("dimension overflow".into()))?,
        )?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Vector::new(values).map_err(|e| match e {
            EmbeddingError::NonFinite { component, .. } => EmbeddingError::NonFinite {
                component,
                context: context(),
            },
            other => other,
        })
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Decodes the binary store layout.
pub fn decode_store(bytes: &[u8]) -> Result<EmbeddedCorpus, EmbeddingError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != STORE_MAGIC {
        return Err(EmbeddingError::BadMagic);
    }
    let version = cur.u16()?;
    if version != STORE_VERSION {
        return Err(EmbeddingError::UnknownVersion(version));
    }
    let d = cur.u32()?;
    if d == 0 {
        return Err(EmbeddingError::DimensionTooSmall { min: 1, got: 0 });
    }
    let n_docs = cur.u32()?;
    let mut documents = Vec::new();
    for _ in 0..n_docs {
        let id_len = cur.u32()?;
        let id = std::str::from_utf8(cur.take(id_len)?)
            .map_err(|_| EmbeddingError::Malformed("document id is not UTF-8".into()))?
            .to_string();
        let n_paras = cur.u32()?;
        let mut counts = Vec::new();
        for _ in 0..n_paras {
            counts.push(cur.u32()?);
        }
        let mut paragraphs = Vec::with_capacity(n_paras.min(1 << 16));
        for (pi, &count) in counts.iter().enumerate() {
            let mut row = Vec::with_capacity(count.min(1 << 16));
            for si in 0..count {
                row.push(cur.vector(d, || {
                    format!(" (document {id:?} paragraph {pi} sentence {si})")
                })?);
            }
            paragraphs.push(row);
        }
        documents.push(EmbeddedDocument {
            id,
            paragraphs,
            cls: None,
        });
    }
    if cur.remaining() > 0 {
        if cur.take(4)? != CLS_TAG {
            return Err(EmbeddingError::Malformed(
                "unexpected trailing bytes".into(),
            ));
        }
        for doc in &mut documents {
            let id = doc.id.clone();
            doc.cls = Some(cur.vector(d, || format!(" (cls vector of {id:?})"))?);
        }
        if cur.remaining() > 0 {
            return Err(EmbeddingError::Malformed(
                "unexpected trailing bytes".into(),
            ));
        }
    }
    EmbeddedCorpus::new(d, documents)
}

#[derive(Serialize, Deserialize)]
struct JsonlStoreRecord {
    id: String,
    paragraphs: Vec<Vec<Vec<f32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cls: Option<Vec<f32>>,
}

/// Decodes the JSONL debug store. The dimension is taken from the first vector.
pub fn decode_jsonl_store(text: &str) -> Result<EmbeddedCorpus, EmbeddingError> {
    let mut documents = Vec::new();
    let mut dimension = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlStoreRecord = serde_json::from_str(line)
            .map_err(|e| EmbeddingError::Malformed(format!("line {}: {e}", lineno + 1)))?;
        let mut paragraphs = Vec::with_capacity(rec.paragraphs.len());
        for (pi, para) in rec.paragraphs.into_iter().enumerate() {
            let mut row = Vec::with_capacity(para.len());
            for (si, values) in para.into_iter().enumerate() {
                let d = *dimension.get_or_insert(values.len());
                if values.len() != d {
                    return Err(EmbeddingError::DimensionMismatch {
                        expected: d,
                        found: values.len(),
                        context: format!(" (document {:?} paragraph {pi} sentence {si})", rec.id),
                    });
                }
                row.push(Vector::new(values)?);
            }
            paragraphs.push(row);
        }
        let cls = rec.cls.map(Vector::new).transpose()?;
        documents.push(EmbeddedDocument {
            id: rec.id,
            paragraphs,
            cls,
        });
    }
    let dimension =
        dimension.ok_or_else(|| EmbeddingError::Malformed("store has no vectors".into()))?;
    EmbeddedCorpus::new(dimension, documents)
}

pub fn encode_jsonl_store(ec: &EmbeddedCorpus) -> String {
    let mut out = String::new();
    for doc in &ec.documents {
        let rec = JsonlStoreRecord {
            id: doc.id.clone(),
            paragraphs: doc
                .paragraphs
                .iter()
                .map(|p| p.iter().map(|v| v.as_slice().to_vec()).collect())
                .collect(),
            cls: doc.cls.as_ref().map(|v| v.as_slice().to_vec()),
        };
        out.push_str(&serde_json::to_string(&rec).expect("finite floats serialize"));
        out.push('\n');
    }
    out
}

/// Writes the binary store.
pub fn save_embeddings(ec: &EmbeddedCorpus, path: &Path) -> Result<(), EmbeddingError> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(&encode_store(ec))?;
    f.flush()?;
    Ok(())
}

pub fn save_embeddings_jsonl(ec: &EmbeddedCorpus, path: &Path) -> Result<(), EmbeddingError> {
    fs::write(path, encode_jsonl_store(ec))?;
    Ok(())
}

/// Loads a binary store, or a JSONL debug store when the magic is absent.
pub fn load_embeddings(path: &Path) -> Result<EmbeddedCorpus, EmbeddingError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(STORE_MAGIC) || !bytes.trim_ascii_start().starts_with(b"{") {
        decode_store(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| EmbeddingError::Malformed("JSONL store is not UTF-8".into()))?;
        decode_jsonl_store(text)
    }
}
