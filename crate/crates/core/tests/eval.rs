use std::collections::BTreeSet;

use docsim::eval::{evaluate, hr_at_k, mpr, mrr, percentile_rank, EvalError, GroundTruth};
use docsim::scoring::{RankedEntry, RankedList};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn list(source: &str, ids: &[String]) -> RankedList {
    RankedList {
        source: source.into(),
        entries: ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                id: id.clone(),
                score: -(i as f64),
                explain: None,
            })
            .collect(),
    }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

#[test]
fn hand_examples() {
    // five candidates, true ones at ranks 1 and 4
    let order = ids(5);
    let mut gt = GroundTruth::new();
    gt.insert("s", ["c0", "c3"]).unwrap();
    let r = [list("s", &order)];
    assert_eq!(mpr(&r, &gt).unwrap(), (1.0 + 0.25) / 2.0);
    assert_eq!(mrr(&r, &gt).unwrap(), 1.0);
    assert_eq!(hr_at_k(&r, &gt, 1).unwrap(), 0.5);
    assert_eq!(hr_at_k(&r, &gt, 3).unwrap(), 0.5);
    assert_eq!(hr_at_k(&r, &gt, 4).unwrap(), 1.0);
    assert_eq!(hr_at_k(&r, &gt, 100).unwrap(), 1.0);
    assert_eq!(percentile_rank(1, 2).unwrap(), 1.0);
    assert_eq!(percentile_rank(2, 2).unwrap(), 0.0);
    assert!(percentile_rank(1, 1).is_err());
    assert!(matches!(hr_at_k(&r, &gt, 0), Err(EvalError::InvalidK)));
}

#[test]
fn missing_pieces_are_errors() {
    let mut gt = GroundTruth::new();
    gt.insert("s", ["zz"]).unwrap();
    assert!(matches!(
        mpr(&[list("s", &ids(3))], &gt),
        Err(EvalError::MissingCandidate { .. })
    ));
    assert!(matches!(mpr(&[], &gt), Err(EvalError::MissingRanking(_))));
    assert!(GroundTruth::new().insert("a", ["a"]).is_err());
    let text = "{\"source\":\"a\",\"similar\":[\"b\"]}\n{\"source\":\"a\",\"similar\":[\"c\"]}\n";
    assert!(GroundTruth::from_jsonl(text.as_bytes()).is_err());
}

#[test]
fn null_model_centres_on_one_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut gt = GroundTruth::new();
    gt.insert("s", ["c3", "c17"]).unwrap();
    let mut order = ids(40);
    let mut total = 0.0;
    for _ in 0..1000 {
        order.shuffle(&mut rng);
        total += mpr(&[list("s", &order)], &gt).unwrap();
    }
    let mean = total / 1000.0;
    assert!((mean - 0.5).abs() <= 0.05, "{mean}");
}

proptest! {
    #[test]
    fn metrics_match_direct_computation(
        n in 2usize..30,
        picks in prop::collection::vec(prop::collection::btree_set(0usize..30, 1..6), 1..5),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gt = GroundTruth::new();
        let mut lists = Vec::new();
        let mut pr_terms = Vec::new();
        let mut rr_terms = Vec::new();
        let mut hr_terms = Vec::new();
        for (s, pick) in picks.iter().enumerate() {
            let truth: BTreeSet<String> = pick.iter().map(|&i| format!("c{}", i % n)).collect();
            let mut order = ids(n);
            order.shuffle(&mut rng);
            let source = format!("s{s}");
            gt.insert(source.clone(), truth.iter().cloned()).unwrap();
            let mut ranks: Vec<usize> = truth.iter().map(|t| order.iter().position(|o| o == t).unwrap() + 1).collect();
            ranks.sort();
            for &r in &ranks {
                pr_terms.push(1.0 - (r as f64 - 1.0) / (n as f64 - 1.0));
            }
            rr_terms.push(1.0 / ranks[0] as f64);
            hr_terms.push(ranks.iter().filter(|&&r| r <= 3).count() as f64 / ranks.len() as f64);
            lists.push(list(&source, &order));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let report = evaluate(&lists, &gt, &[3]).unwrap();
        prop_assert!((report.aggregate.mpr - mean(&pr_terms)).abs() < 1e-12);
        prop_assert!((report.aggregate.mrr - mean(&rr_terms)).abs() < 1e-12);
        prop_assert!((report.aggregate.hr[&3] - mean(&hr_terms)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&report.aggregate.mpr));
        prop_assert_eq!(report.aggregate.pairs, pr_terms.len());
        let weighted: f64 = report.per_source.iter().map(|s| s.mpr * s.true_ranks.len() as f64).sum::<f64>()
            / report.aggregate.pairs as f64;
        prop_assert!((weighted - report.aggregate.mpr).abs() < 1e-12);
    }

    #[test]
    fn perfect_ranking_scores_one(n in 2usize..20, k in 1usize..5) {
        let order = ids(n);
        let k = k.min(n);
        let mut gt = GroundTruth::new();
        gt.insert("s", order[..k].iter().cloned()).unwrap();
        let report = evaluate(&[list("s", &order)], &gt, &[k]).unwrap();
        prop_assert_eq!(report.aggregate.mrr, 1.0);
        prop_assert_eq!(report.aggregate.hr[&k], 1.0);
        if k == 1 {
            prop_assert_eq!(report.aggregate.mpr, 1.0);
        }
    }
}
