//! Two-stage hierarchical document scoring and the single-vector baselines.
//!
//! For a source `s` and candidate `c`:
//!
//! 1. For each paragraph pair `(s_i, c_j)` build the sentence-similarity
//!    matrix `M[k][r] = cos(s_i^k, c_j^r)` and reduce it to the paragraph score
//!    `P[i][j] = mean_k max_r M[k][r]`.
//! 2. Z-score every source-paragraph row `i` with statistics pooled over that
//!    row across *all* candidates, then `S(s, c) = mean_i max_j NRM(P)[i][j]`.
//!
//! Candidates are sorted by descending `S`, ties broken by ascending id.
//! All arithmetic after loading the `f32` vectors is done in `f64`.

use std::cmp::Ordering;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{mean_pool, EmbeddedCorpus, EmbeddedDocument, EmbeddingError, Vector};

/// Rows whose pooled standard deviation is below this are normalized to 0.
pub const SIGMA_FLOOR: f64 = 1e-12;

pub const DEFAULT_FIRST_WINDOW: usize = 16;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("cosine of a zero-norm vector")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("source paragraph {source_paragraph} sentence {source_sentence} vs candidate paragraph {candidate_paragraph} sentence {candidate_sentence}: {cause}")]
    Sentence {
        source_paragraph: usize,
        source_sentence: usize,
        candidate_paragraph: usize,
        candidate_sentence: usize,
        cause: Box<ScoringError>,
    },
    #[error("document {id:?}: {cause}")]
    Document {
        id: String,
        cause: Box<ScoringError>,
    },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("matrices disagree on row count: {0} vs {1}")]
    RowCountMismatch(usize, usize),
    #[error("unknown source document {0:?}")]
    UnknownSource(String),
    #[error("cls mode needs a classifier vector for every document")]
    NoClsVectors,
    #[error("ranking needs at least two documents")]
    TooFewDocuments,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("rank report line {line}: {message}")]
    Report { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl ScoringError {
    fn in_document(self, id: &str) -> Self {
        ScoringError::Document {
            id: id.to_string(),
            cause: Box::new(self),
        }
    }
}

fn cosine_with_norms(a: &Vector, na: f64, b: &Vector, nb: f64) -> Result<f64, ScoringError> {
    if a.dim() != b.dim() {
        return Err(ScoringError::DimensionMismatch(a.dim(), b.dim()));
    }
    if na == 0.0 || nb == 0.0 {
        return Err(ScoringError::ZeroNorm);
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `dot(a, b) / (|a| |b|)` clamped to `[-1, 1]`.
pub fn cosine(a: &Vector, b: &Vector) -> Result<f64, ScoringError> {
    cosine_with_norms(a, a.norm(), b, b.norm())
}

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Cosines between the sentences of one source and one candidate paragraph.
pub type SentenceSimMatrix = SimMatrix;
/// Paragraph scores between one source and one candidate document.
pub type ParagraphSimMatrix = SimMatrix;

impl SimMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ScoringError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(ScoringError::EmptyMatrix);
        }
        Ok(SimMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Mean over rows of each row's maximum.
    pub fn mean_row_max(&self) -> f64 {
        let sum: f64 = (0..self.rows).map(|i| row_max(self.row(i)).1).sum();
        sum / self.rows as f64
    }
}

// (first index of the maximum, maximum)
fn row_max(row: &[f64]) -> (usize, f64) {
    let mut best = (0, row[0]);
    for (j, &x) in row.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (j, x);
        }
    }
    best
}

/// A paragraph's sentence vectors with their precomputed norms.
struct NormedParagraph<'a> {
    vectors: &'a [Vector],
    norms: Vec<f64>,
}

impl<'a> NormedParagraph<'a> {
    fn new(vectors: &'a [Vector]) -> Self {
        NormedParagraph {
            vectors,
            norms: vectors.iter().map(Vector::norm).collect(),
        }
    }
}

fn sentence_matrix_normed(
    s: &NormedParagraph<'_>,
    c: &NormedParagraph<'_>,
) -> Result<SimMatrix, ScoringError> {
    if s.vectors.is_empty() || c.vectors.is_empty() {
        return Err(ScoringError::EmptyMatrix);
    }
    let mut data = Vec::with_capacity(s.vectors.len() * c.vectors.len());
    for (k, (a, &na)) in s.vectors.iter().zip(&s.norms).enumerate() {
        for (r, (b, &nb)) in c.vectors.iter().zip(&c.norms).enumerate() {
            let value =
                cosine_with_norms(a, na, b, nb).map_err(|cause| ScoringError::Sentence {
                    source_paragraph: 0,
                    source_sentence: k,
                    candidate_paragraph: 0,
                    candidate_sentence: r,
                    cause: Box::new(cause),
                })?;
            data.push(value);
        }
    }
    Ok(SimMatrix {
        rows: s.vectors.len(),
        cols: c.vectors.len(),
        data,
    })
}

/// Sentence-similarity matrix between two paragraphs.
pub fn sentence_sim_matrix(
    source: &[Vector],
    candidate: &[Vector],
) -> Result<SentenceSimMatrix, ScoringError> {
    sentence_matrix_normed(
        &NormedParagraph::new(source),
        &NormedParagraph::new(candidate),
    )
}

/// Mean over source sentences of the best-matching candidate sentence.
pub fn paragraph_score(m: &SentenceSimMatrix) -> f64 {
    m.mean_row_max()
}

fn set_paragraphs(err: ScoringError, i: usize, j: usize) -> ScoringError {
    match err {
        ScoringError::Sentence {
            source_sentence,
            candidate_sentence,
            cause,
            ..
        } => ScoringError::Sentence {
            source_paragraph: i,
            source_sentence,
            candidate_paragraph: j,
            candidate_sentence,
            cause,
        },
        other => other,
    }
}

fn paragraph_matrix_normed(
    s: &[NormedParagraph<'_>],
    c: &[NormedParagraph<'_>],
) -> Result<ParagraphSimMatrix, ScoringError> {
    if s.is_empty() || c.is_empty() {
        return Err(ScoringError::EmptyMatrix);
    }
    let mut data = Vec::with_capacity(s.len() * c.len());
    for (i, sp) in s.iter().enumerate() {
        for (j, cp) in c.iter().enumerate() {
            let m = sentence_matrix_normed(sp, cp).map_err(|e| set_paragraphs(e, i, j))?;
            data.push(paragraph_score(&m));
        }
    }
    Ok(SimMatrix {
        rows: s.len(),
        cols: c.len(),
        data,
    })
}

/// Paragraph-similarity matrix of `source` against `candidate` (rows are
/// source paragraphs). Not symmetric in its arguments.
pub fn paragraph_sim_matrix(
    source: &EmbeddedDocument,
    candidate: &EmbeddedDocument,
) -> Result<ParagraphSimMatrix, ScoringError> {
    let s: Vec<_> = source
        .paragraphs
        .iter()
        .map(|p| NormedParagraph::new(p))
        .collect();
    let c: Vec<_> = candidate
        .paragraphs
        .iter()
        .map(|p| NormedParagraph::new(p))
        .collect();
    paragraph_matrix_normed(&s, &c)
}

/// Which cells of row `i` feed the per-row mean and deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormPooling {
    /// Every `(j, c)` cell of row `i`.
    #[default]
    AllCells,
    /// Only each candidate's row-`i` maximum.
    RowMaxima,
}

impl FromStr for NormPooling {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-cells" => Ok(NormPooling::AllCells),
            "row-maxima" => Ok(NormPooling::RowMaxima),
            other => Err(ScoringError::InvalidOption(format!(
                "unknown pooling {other:?}"
            ))),
        }
    }
}

/// Per source-paragraph row: pooled mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

/// Z-scores each row of every matrix with statistics pooled over that row
/// across all matrices. Matrices are visited in the order given, which fixes
/// the floating-point summation order.
pub fn global_normalize(
    matrices: &[ParagraphSimMatrix],
    pooling: NormPooling,
) -> Result<(Vec<ParagraphSimMatrix>, NormalizationStats), ScoringError> {
    let first = matrices.first().ok_or(ScoringError::EmptyMatrix)?;
    let rows = first.rows;
    if let Some(m) = matrices.iter().find(|m| m.rows != rows) {
        return Err(ScoringError::RowCountMismatch(rows, m.rows));
    }
    let mut mean = Vec::with_capacity(rows);
    let mut std_dev = Vec::with_capacity(rows);
    for i in 0..rows {
        let pooled: Vec<f64> = match pooling {
            NormPooling::AllCells => matrices
                .iter()
                .flat_map(|m| m.row(i).iter().copied())
                .collect(),
            NormPooling::RowMaxima => matrices.iter().map(|m| row_max(m.row(i)).1).collect(),
        };
        let n = pooled.len() as f64;
        let mu = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
        mean.push(mu);
        std_dev.push(var.sqrt());
    }
    let normalized = matrices
        .iter()
        .map(|m| {
            let mut data = Vec::with_capacity(m.data.len());
            for i in 0..rows {
                for &x in m.row(i) {
                    data.push(if std_dev[i] < SIGMA_FLOOR {
                        0.0
                    } else {
                        (x - mean[i]) / std_dev[i]
                    });
                }
            }
            SimMatrix {
                rows: m.rows,
                cols: m.cols,
                data,
            }
        })
        .collect();
    Ok((normalized, NormalizationStats { mean, std_dev }))
}

/// Mean over source paragraphs of the best (normalized) candidate paragraph.
pub fn total_score(normalized: &ParagraphSimMatrix) -> f64 {
    normalized.mean_row_max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMode {
    /// Full hierarchical pipeline.
    Sdr,
    /// Paragraph matrix from cosines of paragraph mean vectors.
    Paragraph,
    /// Cosine of the mean of the first `first_window` sentences.
    First,
    /// Cosine of the mean of all sentence vectors.
    All,
    /// Cosine of stored classifier-token vectors.
    Cls,
}

impl InferenceMode {
    pub const ALL_MODES: [InferenceMode; 5] = [
        InferenceMode::Sdr,
        InferenceMode::Paragraph,
        InferenceMode::First,
        InferenceMode::All,
        InferenceMode::Cls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InferenceMode::Sdr => "sdr",
            InferenceMode::Paragraph => "paragraph",
            InferenceMode::First => "first",
            InferenceMode::All => "all",
            InferenceMode::Cls => "cls",
        }
    }

    fn is_hierarchical(self) -> bool {
        matches!(self, InferenceMode::Sdr | InferenceMode::Paragraph)
    }
}

impl FromStr for InferenceMode {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InferenceMode::ALL_MODES
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ScoringError::InvalidOption(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOptions {
    pub mode: InferenceMode,
    /// Global row normalization; only meaningful for `sdr` and `paragraph`.
    pub normalize: bool,
    pub pooling: NormPooling,
    /// Sentence prefix length used by `first`.
    pub first_window: usize,
    pub workers: usize,
    /// Attach the best paragraph pair per source paragraph to every entry.
    pub explain: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            mode: InferenceMode::Sdr,
            normalize: true,
            pooling: NormPooling::AllCells,
            first_window: DEFAULT_FIRST_WINDOW,
            workers: 1,
            explain: false,
        }
    }
}

/// Best candidate paragraph for one source paragraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphMatch {
    pub i: usize,
    pub j: usize,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub id: String,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain: Option<Vec<ParagraphMatch>>,
}

/// Candidates of one source, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub source: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// 1-based rank of `id`, if present.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id).map(|p| p + 1)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descending score, then ascending id.
pub fn sort_entries(entries: &mut [RankedEntry]) {
    entries.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
}

enum Prepared<'a> {
    Sentences(Vec<Vec<NormedParagraph<'a>>>),
    ParagraphMeans(Vec<Vec<(Vector, f64)>>),
    Single(Vec<(Vector, f64)>),
}

/// Ranks candidates against any source of one embedded corpus, reusing the
/// per-document preprocessing across sources.
pub struct Scorer<'a> {
    corpus: &'a EmbeddedCorpus,
    options: RankOptions,
    prepared: Prepared<'a>,
    pool: Option<rayon::ThreadPool>,
    // document positions sorted by id
    by_id: Vec<usize>,
}

impl<'a> Scorer<'a> {
    pub fn new(corpus: &'a EmbeddedCorpus, options: RankOptions) -> Result<Self, ScoringError> {
        if corpus.len() < 2 {
            return Err(ScoringError::TooFewDocuments);
        }
        if options.workers == 0 {
            return Err(ScoringError::InvalidOption(
                "workers must be at least 1".into(),
            ));
        }
        if options.mode == InferenceMode::First && options.first_window == 0 {
            return Err(ScoringError::InvalidOption(
                "first window must be at least 1".into(),
            ));
        }
        let docs = corpus.documents();
        let with_norm = |v: Vector| {
            let n = v.norm();
            (v, n)
        };
        let prepared = match options.mode {
            InferenceMode::Sdr => Prepared::Sentences(
                docs.iter()
                    .map(|d| {
                        d.paragraphs
                            .iter()
                            .map(|p| NormedParagraph::new(p))
                            .collect()
                    })
                    .collect(),
            ),
            InferenceMode::Paragraph => Prepared::ParagraphMeans(
                docs.iter()
                    .map(|d| {
                        d.paragraphs
                            .iter()
                            .map(|p| mean_pool(p).map(with_norm))
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|e| ScoringError::from(e).in_document(&d.id))
                    })
                    .collect::<Result<_, _>>()?,
            ),
            InferenceMode::First | InferenceMode::All => Prepared::Single(
                docs.iter()
                    .map(|d| {
                        let take = if options.mode == InferenceMode::First {
                            options.first_window
                        } else {
                            usize::MAX
                        };
                        let prefix: Vec<Vector> =
                            d.sentence_vectors().take(take).cloned().collect();
                        mean_pool(&prefix)
                            .map(with_norm)
                            .map_err(|e| ScoringError::from(e).in_document(&d.id))
                    })
                    .collect::<Result<_, _>>()?,
            ),
            InferenceMode::Cls => {
                if !corpus.has_cls() {
                    return Err(ScoringError::NoClsVectors);
                }
                Prepared::Single(
                    docs.iter()
                        .map(|d| with_norm(d.cls.clone().expect("has_cls checked")))
                        .collect(),
                )
            }
        };
        let pool = if options.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(options.workers)
                    .build()
                    .map_err(|e| ScoringError::Pool(e.to_string()))?,
            )
        } else {
            None
        };
        let mut by_id: Vec<usize> = (0..docs.len()).collect();
        by_id.sort_by(|&a, &b| docs[a].id.cmp(&docs[b].id));
        Ok(Scorer {
            corpus,
            options,
            prepared,
            pool,
            by_id,
        })
    }

    pub fn options(&self) -> &RankOptions {
        &self.options
    }

    fn map_candidates<T, F>(&self, candidates: &[usize], f: F) -> Vec<Result<T, ScoringError>>
    where
        T: Send,
        F: Fn(usize) -> Result<T, ScoringError> + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| candidates.par_iter().map(|&c| f(c)).collect()),
            None => candidates.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Raw paragraph matrices of `source` against every candidate, candidates
    /// in ascending id order. Only defined for the hierarchical modes.
    pub fn paragraph_matrices(
        &self,
        source: &str,
    ) -> Result<Vec<(String, ParagraphSimMatrix)>, ScoringError> {
        let s = self.position(source)?;
        let candidates = self.candidates(s);
        let docs = self.corpus.documents();
        let results = self.map_candidates(&candidates, |c| {
            let m = match &self.prepared {
                Prepared::Sentences(p) => paragraph_matrix_normed(&p[s], &p[c]),
                Prepared::ParagraphMeans(p) => {
                    let mut rows = Vec::with_capacity(p[s].len());
                    for (a, na) in &p[s] {
                        let mut row = Vec::with_capacity(p[c].len());
                        for (b, nb) in &p[c] {
                            row.push(cosine_with_norms(a, *na, b, *nb)?);
                        }
                        rows.push(row);
                    }
                    SimMatrix::from_rows(rows)
                }
                Prepared::Single(_) => Err(ScoringError::InvalidOption(format!(
                    "mode {} has no paragraph matrix",
                    self.options.mode.name()
                ))),
            };
            m.map_err(|e| e.in_document(&docs[c].id))
        });
        candidates
            .iter()
            .zip(results)
            .map(|(&c, r)| r.map(|m| (docs[c].id.clone(), m)))
            .collect()
    }

    fn position(&self, source: &str) -> Result<usize, ScoringError> {
        self.corpus
            .documents()
            .iter()
            .position(|d| d.id == source)
            .ok_or_else(|| ScoringError::UnknownSource(source.to_string()))
    }

    fn candidates(&self, source: usize) -> Vec<usize> {
        self.by_id
            .iter()
            .copied()
            .filter(|&c| c != source)
            .collect()
    }

    pub fn rank(&self, source: &str) -> Result<RankedList, ScoringError> {
        let mut entries = if self.options.mode.is_hierarchical() {
            self.rank_hierarchical(source)?
        } else {
            self.rank_single(source)?
        };
        sort_entries(&mut entries);
        Ok(RankedList {
            source: source.to_string(),
            entries,
        })
    }

    fn rank_hierarchical(&self, source: &str) -> Result<Vec<RankedEntry>, ScoringError> {
        let raw = self.paragraph_matrices(source)?;
        let (ids, raw): (Vec<String>, Vec<ParagraphSimMatrix>) = raw.into_iter().unzip();
        let normalized = if self.options.normalize {
            global_normalize(&raw, self.options.pooling)?.0
        } else {
            raw.clone()
        };
        Ok(ids
            .into_iter()
            .zip(raw.iter().zip(&normalized))
            .map(|(id, (r, n))| RankedEntry {
                id,
                score: total_score(n),
                explain: self.options.explain.then(|| {
                    (0..n.rows())
                        .map(|i| {
                            let (j, best) = row_max(n.row(i));
                            ParagraphMatch {
                                i,
                                j,
                                raw: r.get(i, j),
                                normalized: best,
                            }
                        })
                        .collect()
                }),
            })
            .collect())
    }

    fn rank_single(&self, source: &str) -> Result<Vec<RankedEntry>, ScoringError> {
        let Prepared::Single(vectors) = &self.prepared else {
            unreachable!("single-vector modes prepare one vector per document")
        };
        let s = self.position(source)?;
        let candidates = self.candidates(s);
        let docs = self.corpus.documents();
        let (a, na) = &vectors[s];
        let scores = self.map_candidates(&candidates, |c| {
            let (b, nb) = &vectors[c];
            cosine_with_norms(a, *na, b, *nb).map_err(|e| e.in_document(&docs[c].id))
        });
        candidates
            .iter()
            .zip(scores)
            .map(|(&c, score)| {
                Ok(RankedEntry {
                    id: docs[c].id.clone(),
                    score: score?,
                    explain: None,
                })
            })
            .collect()
    }

    /// Ranks candidates for every document of the corpus, in corpus order.
    pub fn rank_all(&self) -> Result<Vec<RankedList>, ScoringError> {
        self.corpus
            .documents()
            .iter()
            .map(|d| self.rank(&d.id))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ReportLine {
    source: String,
    id: String,
    score: f64,
    rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    explain: Option<Vec<ParagraphMatch>>,
}

/// Writes ranked lists as JSONL, one line per candidate:
/// `{"source", "id", "score", "rank"[, "explain"]}`.
pub fn write_rank_report<W: Write>(lists: &[RankedList], mut out: W) -> Result<(), ScoringError> {
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            let line = ReportLine {
                source: list.source.clone(),
                id: e.id.clone(),
                score: e.score,
                rank: i + 1,
                explain: e.explain.clone(),
            };
            serde_json::to_writer(&mut out, &line).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a rank report back. Lines of one source must carry ranks `1..=N`.
pub fn read_rank_report<R: BufRead>(reader: R) -> Result<Vec<RankedList>, ScoringError> {
    let mut lists: Vec<(RankedList, Vec<usize>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ReportLine = serde_json::from_str(&line).map_err(|e| ScoringError::Report {
            line: i + 1,
            message: e.to_string(),
        })?;
        let entry = RankedEntry {
            id: rec.id,
            score: rec.score,
            explain: rec.explain,
        };
        match lists.iter_mut().find(|(l, _)| l.source == rec.source) {
            Some((l, ranks)) => {
                l.entries.push(entry);
                ranks.push(rec.rank);
            }
            None => lists.push((
                RankedList {
                    source: rec.source,
                    entries: vec![entry],
                },
                vec![rec.rank],
            )),
        }
    }
    lists
        .into_iter()
        .map(|(mut list, ranks)| {
            let mut order: Vec<usize> = (0..ranks.len()).collect();
            order.sort_by_key(|&k| ranks[k]);
            if order
                .iter()
                .enumerate()
                .any(|(pos, &k)| ranks[k] != pos + 1)
            {
                return Err(ScoringError::Report {
                    line: 0,
                    message: format!(
                        "ranks of source {:?} are not 1..={}",
                        list.source,
                        ranks.len()
                    ),
                });
            }
            let mut slots: Vec<Option<RankedEntry>> = list.entries.drain(..).map(Some).collect();
            list.entries = order
                .iter()
                .map(|&k| slots[k].take().expect("each index once"))
                .collect();
            Ok(list)
        })
        .collect()
}

/// Ranks every other document of `ec` against `source`.
pub fn rank(
    source: &str,
    ec: &EmbeddedCorpus,
    options: &RankOptions,
) -> Result<RankedList, ScoringError> {
    Scorer::new(ec, options.clone())?.rank(source)
}
