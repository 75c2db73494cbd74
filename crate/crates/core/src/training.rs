//! Self-supervised pair sampling and the margin contrastive objective, with a
//! bag-of-tokens toy model trained by plain SGD.
//!
//! Pairs come from the corpus itself: with probability 0.5 two distinct
//! sentences of the same paragraph (positive, `y = 1`), otherwise one sentence
//! from each of two different documents (negative, `y = 0`). The loss is
//!
//! ```text
//! y = 1:  1 - cos(f_p, f_q)
//! y = 0:  max(0, cos(f_p, f_q) - (1 - m))
//! ```
//!
//! With `m = 1` negatives are only pushed until they are orthogonal; `m = 2`
//! penalizes every negative with cosine above -1.
//!
//! The toy trainer optimizes the contrastive term only. A masked-LM term has
//! no meaning for a bag-of-tokens model, so the combined objective is left to
//! transformer backbones outside this crate.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::embedding::{
    load_embeddings, save_embeddings, tokenize, EmbeddedCorpus, EmbeddedDocument, EmbeddingError,
    EmbeddingProvider, SentenceKey, Vector,
};

pub const DEFAULT_MARGIN: f64 = 1.0;
pub const MODEL_FILE: &str = "model.sdre";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const TRACE_FILE: &str = "loss.csv";
const MODEL_DOC_ID: &str = "toy-model";

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("pair sampling needs at least two documents")]
    TooFewDocuments,
    #[error("no paragraph has two or more sentences; intra pairs cannot be sampled")]
    NoMultiSentenceParagraph,
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at step {step}: {what}")]
    Diverged { step: usize, what: String },
    #[error("no known tokens in {0:?}")]
    NoKnownTokens(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SentenceRef {
    pub document: usize,
    pub paragraph: usize,
    pub sentence: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    /// Same paragraph, `y = 1`.
    Intra,
    /// Different documents, `y = 0`.
    Inter,
}

impl PairLabel {
    pub fn y(self) -> u8 {
        match self {
            PairLabel::Intra => 1,
            PairLabel::Inter => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SentencePair {
    pub p: SentenceRef,
    pub q: SentenceRef,
    pub label: PairLabel,
}

/// Draws labelled sentence pairs from a corpus.
#[derive(Debug, Clone)]
pub struct PairSampler<'a> {
    corpus: &'a Corpus,
    intra_probability: f64,
    // (document, paragraph) with at least two sentences
    multi: Vec<(usize, usize)>,
}

impl<'a> PairSampler<'a> {
    pub fn new(corpus: &'a Corpus) -> Result<Self, TrainingError> {
        Self::with_intra_probability(corpus, 0.5)
    }

    pub fn with_intra_probability(
        corpus: &'a Corpus,
        intra_probability: f64,
    ) -> Result<Self, TrainingError> {
        if !(0.0..=1.0).contains(&intra_probability) {
            return Err(TrainingError::InvalidConfig(format!(
                "intra probability {intra_probability} outside [0, 1]"
            )));
        }
        if corpus.len() < 2 && intra_probability < 1.0 {
            return Err(TrainingError::TooFewDocuments);
        }
        let multi: Vec<(usize, usize)> = corpus
            .documents()
            .iter()
            .enumerate()
            .flat_map(|(d, doc)| {
                doc.paragraphs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.sentences.len() >= 2)
                    .map(move |(p, _)| (d, p))
            })
            .collect();
        if multi.is_empty() && intra_probability > 0.0 {
            return Err(TrainingError::NoMultiSentenceParagraph);
        }
        Ok(PairSampler {
            corpus,
            intra_probability,
            multi,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SentencePair {
        if rng.random_bool(self.intra_probability) {
            let (d, p) = self.multi[rng.random_range(0..self.multi.len())];
            let n = self.corpus.documents()[d].paragraphs[p].sentences.len();
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            SentencePair {
                p: SentenceRef {
                    document: d,
                    paragraph: p,
                    sentence: a,
                },
                q: SentenceRef {
                    document: d,
                    paragraph: p,
                    sentence: b,
                },
                label: PairLabel::Intra,
            }
        } else {
            let n = self.corpus.len();
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            SentencePair {
                p: self.uniform_sentence(a, rng),
                q: self.uniform_sentence(b, rng),
                label: PairLabel::Inter,
            }
        }
    }

    fn uniform_sentence<R: Rng + ?Sized>(&self, document: usize, rng: &mut R) -> SentenceRef {
        let doc = &self.corpus.documents()[document];
        let mut k = rng.random_range(0..doc.sentence_count());
        for (pi, p) in doc.paragraphs.iter().enumerate() {
            if k < p.sentences.len() {
                return SentenceRef {
                    document,
                    paragraph: pi,
                    sentence: k,
                };
            }
            k -= p.sentences.len();
        }
        unreachable!("index within sentence count")
    }
}

/// One pair from a fresh sampler; prefer [`PairSampler`] for repeated draws.
pub fn sample_pair<R: Rng + ?Sized>(
    corpus: &Corpus,
    rng: &mut R,
) -> Result<SentencePair, TrainingError> {
    Ok(PairSampler::new(corpus)?.sample(rng))
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<(f64, f64, f64), TrainingError> {
    if p.len() != q.len() {
        return Err(TrainingError::DimensionMismatch(p.len(), q.len()));
    }
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if np == 0.0 || nq == 0.0 {
        return Err(TrainingError::ZeroNorm);
    }
    Ok((dot, np, nq))
}

fn pair_cosine(p: &[f64], q: &[f64]) -> Result<f64, TrainingError> {
    let (dot, np, nq) = check_pair(p, q)?;
    Ok((dot / (np * nq)).clamp(-1.0, 1.0))
}

/// Contrastive loss of one pair; cosine is clamped to `[-1, 1]`.
pub fn contrastive_loss(
    f_p: &[f64],
    f_q: &[f64],
    label: PairLabel,
    margin: f64,
) -> Result<f64, TrainingError> {
    let c = pair_cosine(f_p, f_q)?;
    Ok(match label {
        PairLabel::Intra => 1.0 - c,
        PairLabel::Inter => (c - (1.0 - margin)).max(0.0),
    })
}

/// Analytic gradients `(dL/df_p, dL/df_q)`. The hinge gradient is zero at
/// and below the kink.
pub fn contrastive_grad(
    f_p: &[f64],
    f_q: &[f64],
    label: PairLabel,
    margin: f64,
) -> Result<(Vec<f64>, Vec<f64>), TrainingError> {
    let (dot, np, nq) = check_pair(f_p, f_q)?;
    let c = dot / (np * nq);
    let sign = match label {
        PairLabel::Intra => -1.0,
        PairLabel::Inter if c > 1.0 - margin => 1.0,
        PairLabel::Inter => return Ok((vec![0.0; f_p.len()], vec![0.0; f_q.len()])),
    };
    // d cos / dp = q / (|p||q|) - cos * p / |p|^2
    let gp = f_p
        .iter()
        .zip(f_q)
        .map(|(&x, &y)| sign * (y / (np * nq) - c * x / (np * np)))
        .collect();
    let gq = f_q
        .iter()
        .zip(f_p)
        .map(|(&y, &x)| sign * (x / (np * nq) - c * y / (nq * nq)))
        .collect();
    Ok((gp, gq))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastiveConfig {
    /// Hinge margin, in `(0, 2]`.
    pub margin: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
    pub dimension: usize,
    pub intra_probability: f64,
    /// Record a trace row every this many steps (plus step 0 and the last step).
    pub log_every: usize,
    /// Size of the fixed pair set the trace is measured on.
    pub monitor_pairs: usize,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        ContrastiveConfig {
            margin: DEFAULT_MARGIN,
            learning_rate: 0.05,
            steps: 2000,
            seed: 0,
            dimension: 32,
            intra_probability: 0.5,
            log_every: 100,
            monitor_pairs: 256,
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        let bad = |m: String| Err(TrainingError::InvalidConfig(m));
        if !(self.margin > 0.0 && self.margin <= 2.0) {
            return bad(format!("margin {} outside (0, 2]", self.margin));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            ));
        }
        if self.dimension < 2 {
            return bad(format!("dimension {} must be at least 2", self.dimension));
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.intra_probability) {
            return bad(format!(
                "intra probability {} outside [0, 1]",
                self.intra_probability
            ));
        }
        Ok(())
    }
}

/// Trainable token embedding table; a sentence embeds as the mean of its
/// known tokens' rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dimension: usize,
    weights: Vec<f32>,
}

impl ToyModel {
    /// Vocabulary of `corpus` in first-occurrence order, rows drawn uniformly
    /// from `[-0.5/d, 0.5/d]`.
    pub fn init<R: Rng + ?Sized>(corpus: &Corpus, dimension: usize, rng: &mut R) -> Self {
        let mut vocab = Vec::new();
        let mut index = HashMap::new();
        for s in corpus.documents().iter().flat_map(|d| d.sentences()) {
            for t in tokenize(&s.text) {
                if !index.contains_key(&t) {
                    index.insert(t.clone(), vocab.len());
                    vocab.push(t);
                }
            }
        }
        let bound = 0.5 / dimension as f32;
        let weights = (0..vocab.len() * dimension)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        ToyModel {
            vocab,
            index,
            dimension,
            weights,
        }
    }

    pub fn from_parts(
        vocab: Vec<String>,
        dimension: usize,
        weights: Vec<f32>,
    ) -> Result<Self, TrainingError> {
        if weights.len() != vocab.len() * dimension {
            return Err(TrainingError::Checkpoint(format!(
                "{} weights for {} tokens of dimension {dimension}",
                weights.len(),
                vocab.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(TrainingError::Checkpoint("non-finite weight".into()));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, t) in vocab.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(TrainingError::Checkpoint(format!("duplicate token {t:?}")));
            }
        }
        Ok(ToyModel {
            vocab,
            index,
            dimension,
            weights,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn row(&self, token: usize) -> &[f32] {
        &self.weights[token * self.dimension..(token + 1) * self.dimension]
    }

    /// Row ids of the known tokens of `text`, repeats included.
    pub fn token_ids(&self, text: &str) -> Vec<usize> {
        tokenize(text)
            .iter()
            .filter_map(|t| self.index.get(t).copied())
            .collect()
    }

    pub fn embed_ids(&self, ids: &[usize]) -> Option<Vec<f64>> {
        if ids.is_empty() {
            return None;
        }
        let mut acc = vec![0f64; self.dimension];
        for &t in ids {
            for (a, &w) in acc.iter_mut().zip(self.row(t)) {
                *a += w as f64;
            }
        }
        let n = ids.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Some(acc)
    }

    pub fn embed_text(&self, text: &str) -> Result<Vec<f64>, TrainingError> {
        self.embed_ids(&self.token_ids(text))
            .ok_or_else(|| TrainingError::NoKnownTokens(text.to_string()))
    }

    /// Writes `model.sdre` (one row per token in the binary store layout) and
    /// `vocab.txt` (one token per line, in row order) into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), TrainingError> {
        fs::create_dir_all(dir)?;
        let rows = (0..self.vocab.len())
            .map(|t| Vector::new(self.row(t).to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let store = EmbeddedCorpus::new(
            self.dimension,
            vec![EmbeddedDocument {
                id: MODEL_DOC_ID.into(),
                paragraphs: vec![rows],
                cls: None,
            }],
        )?;
        save_embeddings(&store, &dir.join(MODEL_FILE))?;
        let mut vocab = io::BufWriter::new(fs::File::create(dir.join(VOCAB_FILE))?);
        for t in &self.vocab {
            writeln!(vocab, "{t}")?;
        }
        vocab.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, TrainingError> {
        let store = load_embeddings(&dir.join(MODEL_FILE))?;
        let vocab: Vec<String> = fs::read_to_string(dir.join(VOCAB_FILE))?
            .lines()
            .map(str::to_string)
            .collect();
        let doc = match store.documents() {
            [doc] if doc.paragraphs.len() == 1 => doc,
            _ => {
                return Err(TrainingError::Checkpoint(
                    "expected a single-paragraph model store".into(),
                ))
            }
        };
        if doc.paragraphs[0].len() != vocab.len() {
            return Err(TrainingError::Checkpoint(format!(
                "{} rows but {} vocabulary entries",
                doc.paragraphs[0].len(),
                vocab.len()
            )));
        }
        let weights = doc.paragraphs[0]
            .iter()
            .flat_map(|v| v.as_slice().iter().copied())
            .collect();
        ToyModel::from_parts(vocab, store.dimension(), weights)
    }
}

impl EmbeddingProvider for ToyModel {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, _key: SentenceKey<'_>, text: &str) -> Result<Vector, EmbeddingError> {
        let v = self
            .embed_text(text)
            .map_err(|e| EmbeddingError::Other(e.to_string()))?;
        Vector::new(v.into_iter().map(|x| x as f32).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    /// Mean contrastive loss over the fixed monitor pairs.
    pub loss: f64,
    pub mean_intra_cos: f64,
    pub mean_inter_cos: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ToyModel,
    pub trace: Vec<TraceRow>,
}

/// Mean pair cosines of a batch of pairs under a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairStats {
    pub mean_loss: f64,
    pub mean_intra_cos: f64,
    pub mean_inter_cos: f64,
    pub intra_pairs: usize,
    pub inter_pairs: usize,
}

impl PairStats {
    pub fn gap(&self) -> f64 {
        self.mean_intra_cos - self.mean_inter_cos
    }
}

// token ids per document → paragraph → sentence
type TokenTable = Vec<Vec<Vec<Vec<usize>>>>;

fn token_table(model: &ToyModel, corpus: &Corpus) -> TokenTable {
    corpus
        .documents()
        .iter()
        .map(|d| {
            d.paragraphs
                .iter()
                .map(|p| {
                    p.sentences
                        .iter()
                        .map(|s| model.token_ids(&s.text))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn ids_of<'t>(table: &'t TokenTable, r: &SentenceRef) -> &'t [usize] {
    &table[r.document][r.paragraph][r.sentence]
}

fn pair_stats(
    model: &ToyModel,
    table: &TokenTable,
    pairs: &[SentencePair],
    margin: f64,
) -> PairStats {
    let (mut loss, mut intra, mut inter, mut n_intra, mut n_inter) =
        (0.0, 0.0, 0.0, 0usize, 0usize);
    for pair in pairs {
        let (Some(p), Some(q)) = (
            model.embed_ids(ids_of(table, &pair.p)),
            model.embed_ids(ids_of(table, &pair.q)),
        ) else {
            continue;
        };
        let Ok(c) = pair_cosine(&p, &q) else { continue };
        loss += contrastive_loss(&p, &q, pair.label, margin).unwrap_or(0.0);
        match pair.label {
            PairLabel::Intra => {
                intra += c;
                n_intra += 1;
            }
            PairLabel::Inter => {
                inter += c;
                n_inter += 1;
            }
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    PairStats {
        mean_loss: mean(loss, n_intra + n_inter),
        mean_intra_cos: mean(intra, n_intra),
        mean_inter_cos: mean(inter, n_inter),
        intra_pairs: n_intra,
        inter_pairs: n_inter,
    }
}

/// Samples `pairs` pairs from `corpus` (seeded) and measures them under
/// `model`. Sentences without any known token are skipped.
pub fn evaluate_pairs(
    model: &ToyModel,
    corpus: &Corpus,
    pairs: usize,
    margin: f64,
    seed: u64,
) -> Result<PairStats, TrainingError> {
    let sampler = PairSampler::new(corpus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<SentencePair> = (0..pairs).map(|_| sampler.sample(&mut rng)).collect();
    Ok(pair_stats(
        model,
        &token_table(model, corpus),
        &sampled,
        margin,
    ))
}

const MONITOR_STREAM: u64 = 0x006d_6f6e_6974_6f72;

/// Trains a [`ToyModel`] on `corpus` with SGD over streamed pairs. Fully
/// determined by `cfg.seed`.
pub fn train_toy(corpus: &Corpus, cfg: &ContrastiveConfig) -> Result<TrainOutcome, TrainingError> {
    cfg.validate()?;
    let sampler = PairSampler::with_intra_probability(corpus, cfg.intra_probability)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = ToyModel::init(corpus, cfg.dimension, &mut rng);
    let table = token_table(&model, corpus);

    let mut monitor_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ MONITOR_STREAM);
    let monitor: Vec<SentencePair> = (0..cfg.monitor_pairs)
        .map(|_| sampler.sample(&mut monitor_rng))
        .collect();

    let d = cfg.dimension;
    let mut trace = Vec::new();
    let record =
        |model: &ToyModel, step: usize, trace: &mut Vec<TraceRow>| -> Result<(), TrainingError> {
            let s = pair_stats(model, &table, &monitor, cfg.margin);
            if !s.mean_loss.is_finite() {
                return Err(TrainingError::Diverged {
                    step,
                    what: "monitor loss is not finite".into(),
                });
            }
            trace.push(TraceRow {
                step,
                loss: s.mean_loss,
                mean_intra_cos: s.mean_intra_cos,
                mean_inter_cos: s.mean_inter_cos,
            });
            Ok(())
        };
    record(&model, 0, &mut trace)?;

    let lr = cfg.learning_rate;
    for step in 1..=cfg.steps {
        let pair = sampler.sample(&mut rng);
        let (pi, qi) = (ids_of(&table, &pair.p), ids_of(&table, &pair.q));
        // Every sentence of the training corpus has at least one token.
        let p = model.embed_ids(pi).expect("training sentences have tokens");
        let q = model.embed_ids(qi).expect("training sentences have tokens");
        let loss = contrastive_loss(&p, &q, pair.label, cfg.margin).map_err(|e| {
            TrainingError::Diverged {
                step,
                what: e.to_string(),
            }
        })?;
        if !loss.is_finite() {
            return Err(TrainingError::Diverged {
                step,
                what: format!("loss {loss}"),
            });
        }
        if lr > 0.0 {
            let (gp, gq) = contrastive_grad(&p, &q, pair.label, cfg.margin)?;
            for (ids, g) in [(pi, &gp), (qi, &gq)] {
                let scale = lr / ids.len() as f64;
                for &t in ids {
                    let row = &mut model.weights[t * d..(t + 1) * d];
                    for (w, &gk) in row.iter_mut().zip(g.iter()) {
                        *w -= (scale * gk) as f32;
                    }
                }
            }
            let touched = pi.iter().chain(qi);
            for &t in touched {
                if model.row(t).iter().any(|w| !w.is_finite()) {
                    return Err(TrainingError::Diverged {
                        step,
                        what: format!("non-finite weight in row of {:?}", model.vocab[t]),
                    });
                }
            }
        }
        if step % cfg.log_every == 0 || step == cfg.steps {
            record(&model, step, &mut trace)?;
        }
    }
    Ok(TrainOutcome { model, trace })
}

/// Writes the trace as CSV with header `step,loss,mean_intra_cos,mean_inter_cos`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<(), TrainingError> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
