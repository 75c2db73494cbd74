//! Hierarchical text model (document → paragraph → sentence) and ingestion.
//!
//! Two input formats are accepted:
//!
//! * JSONL, one document per line: `{"id": str, "title": str, "sections": [str, ...]}`.
//!   Every section is paragraph-segmented on its own, so a section without
//!   blank lines becomes exactly one paragraph. Titles are metadata only and
//!   never contribute sentences.
//! * A plaintext directory: one `.txt` file per document, file stem = id,
//!   paragraphs separated by blank lines.
//!
//! All text is NFC-normalized on ingestion; case is preserved.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("record {record}: input is not valid UTF-8")]
    InvalidUtf8 { record: String },
    #[error("record {record}: malformed input: {message}")]
    Malformed { record: String, message: String },
    #[error("duplicate document id {id:?} (records {first} and {second})")]
    DuplicateId {
        id: String,
        first: String,
        second: String,
    },
    #[error("invalid document {id:?}: {message}")]
    InvalidDocument { id: String, message: String },
    #[error("corpus is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub index_in_paragraph: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub sentences: Vec<Sentence>,
    pub index_in_document: usize,
}

impl Paragraph {
    /// Sentences joined by single spaces.
    pub fn text(&self) -> String {
        let parts: Vec<&str> = self.sentences.iter().map(|s| s.text.as_str()).collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub paragraphs: Vec<Paragraph>,
}

impl Document {
    /// Builds a document from section strings. Each section is split into
    /// paragraphs on blank lines and every paragraph into sentences. The result
    /// may have zero paragraphs if every section is blank.
    pub fn from_sections<S: AsRef<str>>(
        id: impl Into<String>,
        title: impl Into<String>,
        sections: &[S],
    ) -> Self {
        let mut paragraphs = Vec::new();
        for section in sections {
            let normalized: String = section.as_ref().nfc().collect();
            for raw in segment_paragraphs(&normalized) {
                let sentences = segment_sentences(&raw);
                if sentences.is_empty() {
                    continue;
                }
                paragraphs.push(Paragraph {
                    sentences,
                    index_in_document: paragraphs.len(),
                });
            }
        }
        Document {
            id: id.into().nfc().collect(),
            title: title.into().nfc().collect(),
            paragraphs,
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.paragraphs.iter().map(|p| p.sentences.len()).sum()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.paragraphs.iter().flat_map(|p| p.sentences.iter())
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |message: String| CorpusError::InvalidDocument {
            id: self.id.clone(),
            message,
        };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        if self.paragraphs.is_empty() {
            return Err(invalid("no paragraphs".into()));
        }
        for (pi, p) in self.paragraphs.iter().enumerate() {
            if p.index_in_document != pi {
                return Err(invalid(format!(
                    "paragraph {pi} has index {}",
                    p.index_in_document
                )));
            }
            if p.sentences.is_empty() {
                return Err(invalid(format!("paragraph {pi} has no sentences")));
            }
            for (si, s) in p.sentences.iter().enumerate() {
                if s.index_in_paragraph != si {
                    return Err(invalid(format!(
                        "paragraph {pi} sentence {si} has index {}",
                        s.index_in_paragraph
                    )));
                }
                if s.text.trim().is_empty() {
                    return Err(invalid(format!("paragraph {pi} sentence {si} is blank")));
                }
            }
        }
        Ok(())
    }
}

/// An ordered, validated collection of documents with pairwise distinct ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut index = HashMap::with_capacity(documents.len());
        for (pos, doc) in documents.iter().enumerate() {
            doc.validate()?;
            if let Some(prev) = index.insert(doc.id.clone(), pos) {
                return Err(CorpusError::DuplicateId {
                    id: doc.id.clone(),
                    first: (prev + 1).to_string(),
                    second: (pos + 1).to_string(),
                });
            }
        }
        Ok(Corpus { documents, index })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    PlaintextDir,
}

/// A document that produced no sentences and was left out of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedDocument {
    pub id: String,
    pub record: String,
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub corpus: Corpus,
    pub dropped: Vec<DroppedDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    id: String,
    #[serde(default)]
    title: String,
    sections: Vec<String>,
}

/// Reads a corpus from `path`: a JSONL file or a plaintext directory.
pub fn parse_corpus(path: &Path, format: CorpusFormat) -> Result<ParseOutcome, CorpusError> {
    match format {
        CorpusFormat::Jsonl => {
            let file = fs::File::open(path)?;
            parse_jsonl(io::BufReader::new(file))
        }
        CorpusFormat::PlaintextDir => read_plaintext_dir(path),
    }
}

/// Parses the JSONL corpus format. Record numbers in errors are 1-based line
/// numbers; blank lines are skipped.
pub fn parse_jsonl<R: BufRead>(mut reader: R) -> Result<ParseOutcome, CorpusError> {
    let mut entries = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| CorpusError::InvalidUtf8 {
            record: line_no.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            record: line_no.to_string(),
            message: e.to_string(),
        })?;
        if rec.id.trim().is_empty() {
            return Err(CorpusError::Malformed {
                record: line_no.to_string(),
                message: "empty id".into(),
            });
        }
        let doc = Document::from_sections(rec.id, rec.title, &rec.sections);
        entries.push((line_no.to_string(), doc));
    }
    assemble(entries)
}

/// Reads every `*.txt` file of `dir` (sorted by file name) as one document.
pub fn read_plaintext_dir(dir: &Path) -> Result<ParseOutcome, CorpusError> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    let mut entries = Vec::with_capacity(paths.len());
    for path in paths {
        let record = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let bytes = fs::read(&path)?;
        let text = String::from_utf8(bytes).map_err(|_| CorpusError::InvalidUtf8 {
            record: record.clone(),
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let doc = Document::from_sections(stem.clone(), stem, &[text]);
        entries.push((record, doc));
    }
    assemble(entries)
}

fn assemble(entries: Vec<(String, Document)>) -> Result<ParseOutcome, CorpusError> {
    let mut seen: HashMap<String, String> = HashMap::new();
    let mut documents = Vec::new();
    let mut dropped = Vec::new();
    for (record, doc) in entries {
        if let Some(first) = seen.get(&doc.id) {
            return Err(CorpusError::DuplicateId {
                id: doc.id,
                first: first.clone(),
                second: record,
            });
        }
        seen.insert(doc.id.clone(), record.clone());
        if doc.paragraphs.is_empty() {
            dropped.push(DroppedDocument { id: doc.id, record });
        } else {
            documents.push(doc);
        }
    }
    let corpus = Corpus::new(documents)?;
    Ok(ParseOutcome { corpus, dropped })
}

/// Writes the canonical JSONL form: one section per paragraph, sentences
/// joined by single spaces.
pub fn serialize_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<(), CorpusError> {
    for doc in corpus.documents() {
        let rec = JsonlRecord {
            id: doc.id.clone(),
            title: doc.title.clone(),
            sections: doc.paragraphs.iter().map(Paragraph::text).collect(),
        };
        serde_json::to_writer(&mut out, &rec).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Splits text into paragraphs on runs of one or more blank lines. Segments
/// are trimmed and empty ones removed.
pub fn segment_paragraphs(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut flush = |current: &mut Vec<&str>| {
        if !current.is_empty() {
            let joined = current.join("\n");
            let trimmed = joined.trim();
            if !trimmed.is_empty() {
                out.push(trimmed.to_string());
            }
            current.clear();
        }
    };
    for line in raw.lines() {
        if line.trim().is_empty() {
            flush(&mut current);
        } else {
            current.push(line);
        }
    }
    flush(&mut current);
    out
}

/// Lowercased tokens that end in a period but never end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "mt.", "etc.", "vs.", "e.g.",
    "i.e.", "cf.", "inc.", "ltd.", "fig.", "approx.",
];

const TERMINALS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '”', '’', '»'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '“', '‘', '«'];

/// Rule-based English sentence splitter.
///
/// A boundary is a run of `.`/`!`/`?` (optionally followed by closing quotes
/// or brackets), then whitespace, then an uppercase letter, a digit or an
/// opening quote/bracket. A single period closing a token from
/// [`ABBREVIATIONS`] never splits. Any trailing text without terminal
/// punctuation forms the last sentence.
pub fn segment_sentences(paragraph: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let n = chars.len();
    let byte_at = |i: usize| if i < n { chars[i].0 } else { paragraph.len() };

    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < n {
        let c = chars[i].1;
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && TERMINALS.contains(&chars[j].1) {
            j += 1;
        }
        let single_period = c == '.' && j == i + 1;
        while j < n && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < n && chars[k].1.is_whitespace() {
            k += 1;
        }
        let next_ok = k > j
            && k < n
            && (chars[k].1.is_uppercase()
                || chars[k].1.is_ascii_digit()
                || OPENERS.contains(&chars[k].1));
        if next_ok && !(single_period && is_abbreviation(paragraph, byte_at(i))) {
            pieces.push(&paragraph[byte_at(start)..byte_at(j)]);
            start = k;
            i = k;
        } else {
            i = j.max(i + 1);
        }
    }
    if start < n {
        pieces.push(&paragraph[byte_at(start)..]);
    }
    pieces
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(index_in_paragraph, text)| Sentence {
            text: text.to_string(),
            index_in_paragraph,
        })
        .collect()
}

// `period` is the byte offset of the '.' closing the candidate token.
fn is_abbreviation(text: &str, period: usize) -> bool {
    let head = &text[..period];
    let token_start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let token = text[token_start..=period].trim_start_matches(|c| OPENERS.contains(&c));
    let lower = token.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}
