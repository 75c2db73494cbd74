// Shared by several test targets; not every target uses every helper.
#![allow(dead_code)]

use std::collections::BTreeMap;

use docsim::embedding::{EmbeddedCorpus, EmbeddedDocument, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vector {
    loop {
        let xs: Vec<f32> = (0..d)
            .map(|_| rng.sample::<f32, _>(StandardNormal))
            .collect();
        if xs.iter().map(|x| x * x).sum::<f32>() > 1e-2 {
            return Vector::new(xs).unwrap();
        }
    }
}

pub fn random_document<R: Rng>(
    rng: &mut R,
    id: String,
    d: usize,
    max_p: usize,
    max_s: usize,
) -> EmbeddedDocument {
    let paragraphs = (0..rng.random_range(1..=max_p))
        .map(|_| {
            (0..rng.random_range(1..=max_s))
                .map(|_| random_vector(rng, d))
                .collect()
        })
        .collect();
    EmbeddedDocument {
        id,
        paragraphs,
        cls: None,
    }
}

/// 2..=max_docs documents, each with 1..=max_p paragraphs of 1..=max_s
/// sentences, dimension 1..=max_d.
pub fn random_store<R: Rng>(
    rng: &mut R,
    max_docs: usize,
    max_p: usize,
    max_s: usize,
    max_d: usize,
) -> EmbeddedCorpus {
    let d = rng.random_range(1..=max_d);
    let n = rng.random_range(2..=max_docs);
    let docs = (0..n)
        .map(|i| random_document(rng, format!("d{i}"), d, max_p, max_s))
        .collect();
    EmbeddedCorpus::new(d, docs).unwrap()
}

pub fn to_f64(v: &Vector) -> Vec<f64> {
    v.as_slice().iter().map(|&x| x as f64).collect()
}

pub fn cos64(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for k in 0..a.len() {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Straight-line reference: paragraph matrix of `s` against `c`, rows are
/// source paragraphs.
pub fn reference_paragraph_matrix(s: &EmbeddedDocument, c: &EmbeddedDocument) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for sp in &s.paragraphs {
        let mut row = Vec::new();
        for cp in &c.paragraphs {
            let mut sum = 0.0;
            for a in sp {
                let mut best = f64::NEG_INFINITY;
                for b in cp {
                    let x = cos64(&to_f64(a), &to_f64(b));
                    if x > best {
                        best = x;
                    }
                }
                sum += best;
            }
            row.push(sum / sp.len() as f64);
        }
        out.push(row);
    }
    out
}

/// Reference hierarchical scores of every candidate against `source`.
pub fn reference_scores(
    store: &EmbeddedCorpus,
    source: &str,
    normalize: bool,
) -> BTreeMap<String, f64> {
    let src = store.get(source).unwrap();
    let mut mats = BTreeMap::new();
    for doc in store.documents() {
        if doc.id != source {
            mats.insert(doc.id.clone(), reference_paragraph_matrix(src, doc));
        }
    }
    let rows = src.paragraphs.len();
    let mut mean = vec![0.0; rows];
    let mut sd = vec![0.0; rows];
    for i in 0..rows {
        let cells: Vec<f64> = mats.values().flat_map(|m| m[i].iter().copied()).collect();
        let mu = cells.iter().sum::<f64>() / cells.len() as f64;
        let var = cells.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / cells.len() as f64;
        mean[i] = mu;
        sd[i] = var.sqrt();
    }
    let mut out = BTreeMap::new();
    for (id, m) in mats {
        let mut total = 0.0;
        for i in 0..rows {
            let mut best = f64::NEG_INFINITY;
            for &x in &m[i] {
                let z = if !normalize {
                    x
                } else if sd[i] < 1e-12 {
                    0.0
                } else {
                    (x - mean[i]) / sd[i]
                };
                best = best.max(z);
            }
            total += best;
        }
        out.insert(id, total / rows as f64);
    }
    out
}

/// Reference single-vector score: cosine of mean sentence vectors.
pub fn reference_all_scores(store: &EmbeddedCorpus, source: &str) -> BTreeMap<String, f64> {
    let mean = |doc: &EmbeddedDocument| {
        let mut acc = vec![0.0; store.dimension()];
        let mut n = 0.0;
        for v in doc.sentence_vectors() {
            for (a, x) in acc.iter_mut().zip(to_f64(v)) {
                *a += x;
            }
            n += 1.0;
        }
        acc.into_iter().map(|a| a / n).collect::<Vec<f64>>()
    };
    let s = mean(store.get(source).unwrap());
    store
        .documents()
        .iter()
        .filter(|d| d.id != source)
        .map(|d| (d.id.clone(), cos64(&s, &mean(d))))
        .collect()
}
