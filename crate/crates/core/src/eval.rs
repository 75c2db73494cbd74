//! Ground-truth annotations and ranking metrics: MPR, MRR and HR@k.
//!
//! Conventions (all metrics are higher-is-better):
//!
//! * percentile rank of a true candidate at 1-based `rank` among `N`
//!   candidates is `1 - (rank - 1) / (N - 1)`;
//! * MPR is the mean percentile rank over every (source, true candidate) pair;
//! * MRR is the mean over sources of `1 / best rank of any true candidate`;
//! * HR@k is the mean over sources of `|true ∩ top-k| / |true|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::RankedList;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("source {0:?} annotates itself")]
    SelfAnnotation(String),
    #[error("source {0:?} annotated twice")]
    DuplicateSource(String),
    #[error("source {0:?} has no similar documents")]
    EmptyAnnotation(String),
    #[error("unknown document id {0:?} in ground truth")]
    UnknownId(String),
    #[error("no ranked list for source {0:?}")]
    MissingRanking(String),
    #[error("candidate {candidate:?} of source {source_id:?} is absent from its ranked list")]
    MissingCandidate {
        source_id: String,
        candidate: String,
    },
    #[error("percentile rank needs rank in 1..=N and N >= 2 (rank {rank}, N {n})")]
    InvalidRank { rank: usize, n: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("ground truth is empty")]
    Empty,
}

/// Source id → annotated-similar candidate ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    entries: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthRecord {
    source: String,
    similar: Vec<String>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<I, S>(&mut self, source: impl Into<String>, similar: I) -> Result<(), EvalError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let source = source.into();
        let set: BTreeSet<String> = similar.into_iter().map(Into::into).collect();
        if set.contains(&source) {
            return Err(EvalError::SelfAnnotation(source));
        }
        if set.is_empty() {
            return Err(EvalError::EmptyAnnotation(source));
        }
        if self.entries.contains_key(&source) {
            return Err(EvalError::DuplicateSource(source));
        }
        self.entries.insert(source, set);
        Ok(())
    }

    /// Parses the JSONL format `{"source": id, "similar": [id, ...]}`.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, EvalError> {
        let mut gt = GroundTruth::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: GroundTruthRecord =
                serde_json::from_str(&line).map_err(|e| EvalError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            gt.insert(rec.source, rec.similar)?;
        }
        Ok(gt)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (source, similar) in &self.entries {
            let rec = GroundTruthRecord {
                source: source.clone(),
                similar: similar.iter().cloned().collect(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("strings serialize"));
            out.push('\n');
        }
        out
    }

    /// Checks that every id appears in `known`.
    pub fn validate_ids<'a>(
        &self,
        known: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), EvalError> {
        let known: BTreeSet<&str> = known.into_iter().collect();
        for (source, similar) in &self.entries {
            for id in std::iter::once(source).chain(similar) {
                if !known.contains(id.as_str()) {
                    return Err(EvalError::UnknownId(id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn similar(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(source)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn percentile_rank(rank: usize, n: usize) -> Result<f64, EvalError> {
    if n < 2 || rank == 0 || rank > n {
        return Err(EvalError::InvalidRank { rank, n });
    }
    Ok(1.0 - (rank - 1) as f64 / (n - 1) as f64)
}

/// Ranks of each source's true candidates, sources in ground-truth order.
struct SourceRanks<'a> {
    source: &'a str,
    n: usize,
    ranks: Vec<usize>,
}

fn collect_ranks<'a>(
    rankings: &'a [RankedList],
    gt: &'a GroundTruth,
) -> Result<Vec<SourceRanks<'a>>, EvalError> {
    if gt.is_empty() {
        return Err(EvalError::Empty);
    }
    let by_source: HashMap<&str, &RankedList> =
        rankings.iter().map(|r| (r.source.as_str(), r)).collect();
    gt.iter()
        .map(|(source, similar)| {
            let list = by_source
                .get(source)
                .ok_or_else(|| EvalError::MissingRanking(source.to_string()))?;
            let positions: HashMap<&str, usize> =
                list.ids().enumerate().map(|(i, id)| (id, i + 1)).collect();
            let ranks = similar
                .iter()
                .map(|c| {
                    positions
                        .get(c.as_str())
                        .copied()
                        .ok_or_else(|| EvalError::MissingCandidate {
                            source_id: source.to_string(),
                            candidate: c.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SourceRanks {
                source,
                n: list.len(),
                ranks,
            })
        })
        .collect()
}

pub fn mpr(rankings: &[RankedList], gt: &GroundTruth) -> Result<f64, EvalError> {
    let all = collect_ranks(rankings, gt)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in &all {
        for &r in &s.ranks {
            sum += percentile_rank(r, s.n)?;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

pub fn mrr(rankings: &[RankedList], gt: &GroundTruth) -> Result<f64, EvalError> {
    let all = collect_ranks(rankings, gt)?;
    let sum: f64 = all
        .iter()
        .map(|s| 1.0 / *s.ranks.iter().min().expect("annotations are non-empty") as f64)
        .sum();
    Ok(sum / all.len() as f64)
}

fn hit_ratio(ranks: &[usize], k: usize) -> f64 {
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

pub fn hr_at_k(rankings: &[RankedList], gt: &GroundTruth, k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    let all = collect_ranks(rankings, gt)?;
    Ok(all.iter().map(|s| hit_ratio(&s.ranks, k)).sum::<f64>() / all.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceMetrics {
    pub source: String,
    pub candidates: usize,
    /// 1-based ranks of the true candidates, ascending.
    pub true_ranks: Vec<usize>,
    pub mpr: f64,
    pub mrr: f64,
    pub hr: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateMetrics {
    pub mpr: f64,
    pub mrr: f64,
    pub hr: BTreeMap<usize, f64>,
    pub sources: usize,
    pub pairs: usize,
}

/// Aggregate plus per-source metrics. The aggregate MPR equals the per-source
/// MPRs averaged with weights `true_ranks.len()`; MRR and HR@k are plain means
/// of the per-source values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub aggregate: AggregateMetrics,
    pub per_source: Vec<SourceMetrics>,
}

pub fn evaluate(
    rankings: &[RankedList],
    gt: &GroundTruth,
    ks: &[usize],
) -> Result<MetricsReport, EvalError> {
    if ks.contains(&0) {
        return Err(EvalError::InvalidK);
    }
    let all = collect_ranks(rankings, gt)?;
    let mut per_source = Vec::with_capacity(all.len());
    let (mut pr_sum, mut pairs) = (0.0, 0usize);
    for s in &all {
        let mut ranks = s.ranks.clone();
        ranks.sort_unstable();
        let prs = ranks
            .iter()
            .map(|&r| percentile_rank(r, s.n))
            .collect::<Result<Vec<_>, _>>()?;
        pr_sum += prs.iter().sum::<f64>();
        pairs += prs.len();
        per_source.push(SourceMetrics {
            source: s.source.to_string(),
            candidates: s.n,
            mpr: prs.iter().sum::<f64>() / prs.len() as f64,
            mrr: 1.0 / ranks[0] as f64,
            hr: ks.iter().map(|&k| (k, hit_ratio(&ranks, k))).collect(),
            true_ranks: ranks,
        });
    }
    let n = per_source.len() as f64;
    let aggregate = AggregateMetrics {
        mpr: pr_sum / pairs as f64,
        mrr: per_source.iter().map(|s| s.mrr).sum::<f64>() / n,
        hr: ks
            .iter()
            .map(|&k| (k, per_source.iter().map(|s| s.hr[&k]).sum::<f64>() / n))
            .collect(),
        sources: per_source.len(),
        pairs,
    };
    Ok(MetricsReport {
        aggregate,
        per_source,
    })
}
