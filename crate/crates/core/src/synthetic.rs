//! Seeded synthetic topic corpora with known similarity structure.
//!
//! Every document belongs to one topic. Its topic paragraphs draw each token
//! from the topic's own pool, or from a pool shared by all topics with
//! probability `shared_fraction`. Optional generic paragraphs draw from a
//! handful of topic-independent themes (think "Reception" or "Release"
//! sections that every article has). Two documents are similar exactly when
//! they share a topic.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, Document};
use crate::eval::GroundTruth;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicCorpusConfig {
    pub topics: usize,
    pub docs_per_topic: usize,
    /// Inclusive range of topic paragraphs per document.
    pub topic_paragraphs: (usize, usize),
    /// Inclusive range of generic paragraphs per document.
    pub generic_paragraphs: (usize, usize),
    pub sentences_per_paragraph: (usize, usize),
    pub tokens_per_sentence: (usize, usize),
    pub topic_vocab: usize,
    pub shared_vocab: usize,
    pub shared_fraction: f64,
    pub generic_themes: usize,
    pub generic_vocab: usize,
    /// Prefix for document ids, so several corpora can coexist.
    pub id_prefix: String,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        TopicCorpusConfig {
            topics: 5,
            docs_per_topic: 8,
            topic_paragraphs: (1, 3),
            generic_paragraphs: (0, 0),
            sentences_per_paragraph: (2, 5),
            tokens_per_sentence: (6, 10),
            topic_vocab: 30,
            shared_vocab: 40,
            shared_fraction: 0.3,
            generic_themes: 3,
            generic_vocab: 20,
            id_prefix: "doc".into(),
            seed: 0,
        }
    }
}

impl TopicCorpusConfig {
    /// Long documents padded with topic-independent boilerplate paragraphs.
    pub fn with_boilerplate(seed: u64) -> Self {
        TopicCorpusConfig {
            topic_paragraphs: (1, 2),
            generic_paragraphs: (2, 4),
            seed,
            ..TopicCorpusConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Topic of each document, in corpus order.
    pub topics: Vec<usize>,
    /// Every document → all other documents of its topic.
    pub ground_truth: GroundTruth,
}

fn sentence<R: Rng>(rng: &mut R, len: usize, mut word: impl FnMut(&mut R) -> String) -> String {
    let mut words: Vec<String> = (0..len).map(|_| word(rng)).collect();
    if let Some(first) = words.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            *first = c.to_uppercase().chain(chars).collect();
        }
    }
    format!("{}.", words.join(" "))
}

fn paragraph<R: Rng>(
    rng: &mut R,
    cfg: &TopicCorpusConfig,
    mut word: impl FnMut(&mut R) -> String,
) -> String {
    let n = rng.random_range(cfg.sentences_per_paragraph.0..=cfg.sentences_per_paragraph.1);
    (0..n)
        .map(|_| {
            let len = rng.random_range(cfg.tokens_per_sentence.0..=cfg.tokens_per_sentence.1);
            sentence(rng, len, &mut word)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generates a corpus; identical configs give identical corpora.
pub fn topic_corpus(cfg: &TopicCorpusConfig) -> SyntheticCorpus {
    assert!(
        cfg.topics >= 1 && cfg.docs_per_topic >= 1,
        "need at least one document"
    );
    assert!(
        cfg.topic_paragraphs.0 >= 1,
        "documents need a topic paragraph"
    );
    assert!(cfg.sentences_per_paragraph.0 >= 1 && cfg.tokens_per_sentence.0 >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut documents = Vec::new();
    let mut topics = Vec::new();
    for t in 0..cfg.topics {
        for k in 0..cfg.docs_per_topic {
            let n_topic = rng.random_range(cfg.topic_paragraphs.0..=cfg.topic_paragraphs.1);
            let n_generic = rng.random_range(cfg.generic_paragraphs.0..=cfg.generic_paragraphs.1);
            let mut sections = Vec::with_capacity(n_topic + n_generic);
            for _ in 0..n_topic {
                sections.push(paragraph(&mut rng, cfg, |r| {
                    if cfg.shared_vocab > 0 && r.random_bool(cfg.shared_fraction) {
                        format!("s{}", r.random_range(0..cfg.shared_vocab))
                    } else {
                        format!("t{t}w{}", r.random_range(0..cfg.topic_vocab))
                    }
                }));
            }
            for _ in 0..n_generic {
                let theme = rng.random_range(0..cfg.generic_themes.max(1));
                sections.push(paragraph(&mut rng, cfg, |r| {
                    format!("g{theme}w{}", r.random_range(0..cfg.generic_vocab))
                }));
            }
            sections.shuffle(&mut rng);
            let id = format!("{}-{t}-{k:03}", cfg.id_prefix);
            documents.push(Document::from_sections(
                id,
                format!("topic {t} #{k}"),
                &sections,
            ));
            topics.push(t);
        }
    }
    let corpus = Corpus::new(documents).expect("generated documents are valid");
    let mut ground_truth = GroundTruth::new();
    if cfg.docs_per_topic >= 2 {
        for (i, doc) in corpus.documents().iter().enumerate() {
            let similar = corpus
                .documents()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && topics[j] == topics[i])
                .map(|(_, d)| d.id.clone());
            ground_truth
                .insert(doc.id.clone(), similar)
                .expect("distinct, non-empty annotations");
        }
    }
    SyntheticCorpus {
        corpus,
        topics,
        ground_truth,
    }
}
