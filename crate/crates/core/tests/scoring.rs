mod common;

use docsim::embedding::{EmbeddedCorpus, EmbeddedDocument, Vector};
use docsim::scoring::{
    global_normalize, read_rank_report, write_rank_report, InferenceMode, NormPooling, RankOptions,
    RankedList, Scorer,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn store_from_seed(seed: u64) -> EmbeddedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_store(&mut rng, 6, 3, 4, 8)
}

fn opts(mode: InferenceMode, normalize: bool, workers: usize) -> RankOptions {
    RankOptions {
        mode,
        normalize,
        workers,
        ..RankOptions::default()
    }
}

fn scores(list: &RankedList) -> Vec<(String, f64)> {
    let mut v: Vec<_> = list
        .entries
        .iter()
        .map(|e| (e.id.clone(), e.score))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn with_docs(store: &EmbeddedCorpus, docs: Vec<EmbeddedDocument>) -> EmbeddedCorpus {
    EmbeddedCorpus::new(store.dimension(), docs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_reference_with_and_without_normalization(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        for normalize in [true, false] {
            let scorer = Scorer::new(&store, opts(InferenceMode::Sdr, normalize, 1)).unwrap();
            for doc in store.documents() {
                let want = common::reference_scores(&store, &doc.id, normalize);
                let got = scorer.rank(&doc.id).unwrap();
                prop_assert_eq!(got.len(), store.len() - 1);
                for e in &got.entries {
                    prop_assert!((e.score - want[&e.id]).abs() <= 1e-9, "{} {} vs {}", e.id, e.score, want[&e.id]);
                }
            }
        }
    }

    #[test]
    fn all_mode_matches_mean_vector_cosine(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        let scorer = Scorer::new(&store, opts(InferenceMode::All, true, 1)).unwrap();
        let src = &store.documents()[0].id;
        let want = common::reference_all_scores(&store, src);
        for e in scorer.rank(src).unwrap().entries {
            prop_assert!((e.score - want[&e.id]).abs() <= 1e-5);
        }
    }

    #[test]
    fn power_of_two_scaling_is_exactly_invariant(seed in any::<u64>(), exp in -4i32..5) {
        let store = store_from_seed(seed);
        let lambda = 2f32.powi(exp);
        let scaled = with_docs(
            &store,
            store
                .documents()
                .iter()
                .map(|d| EmbeddedDocument {
                    id: d.id.clone(),
                    paragraphs: d.paragraphs.iter().map(|p| p.iter().map(|v| v.scaled(lambda).unwrap()).collect()).collect(),
                    cls: None,
                })
                .collect(),
        );
        for mode in [InferenceMode::Sdr, InferenceMode::Paragraph, InferenceMode::All] {
            let a = Scorer::new(&store, opts(mode, true, 1)).unwrap().rank_all().unwrap();
            let b = Scorer::new(&scaled, opts(mode, true, 1)).unwrap().rank_all().unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn document_order_does_not_change_scores(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        let mut docs = store.documents().to_vec();
        docs.reverse();
        docs.rotate_left(1);
        let permuted = with_docs(&store, docs);
        let a = Scorer::new(&store, opts(InferenceMode::Sdr, true, 1)).unwrap();
        let b = Scorer::new(&permuted, opts(InferenceMode::Sdr, true, 1)).unwrap();
        for doc in store.documents() {
            let (x, y) = (a.rank(&doc.id).unwrap(), b.rank(&doc.id).unwrap());
            prop_assert_eq!(scores(&x), scores(&y));
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn normalization_preserves_row_argmax(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        let scorer = Scorer::new(&store, opts(InferenceMode::Sdr, true, 1)).unwrap();
        let src = &store.documents()[0].id;
        let raw: Vec<_> = scorer.paragraph_matrices(src).unwrap().into_iter().map(|(_, m)| m).collect();
        for pooling in [NormPooling::AllCells, NormPooling::RowMaxima] {
            let (norm, stats) = global_normalize(&raw, pooling).unwrap();
            for (r, n) in raw.iter().zip(&norm) {
                for i in 0..r.rows() {
                    if stats.std_dev[i] < 1e-12 {
                        prop_assert!(n.row(i).iter().all(|&x| x == 0.0));
                        continue;
                    }
                    for j in 0..r.cols() {
                        for k in 0..r.cols() {
                            if r.get(i, j) > r.get(i, k) {
                                prop_assert!(n.get(i, j) > n.get(i, k));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unnormalized_scores_are_bounded(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        for mode in [InferenceMode::Sdr, InferenceMode::Paragraph, InferenceMode::First, InferenceMode::All] {
            for list in Scorer::new(&store, opts(mode, false, 1)).unwrap().rank_all().unwrap() {
                for e in list.entries {
                    prop_assert!((-1.0..=1.0).contains(&e.score), "{:?} {}", mode, e.score);
                }
            }
        }
    }

    #[test]
    fn verbatim_duplicate_hits_the_ceiling(seed in any::<u64>()) {
        let store = store_from_seed(seed);
        let mut docs = store.documents().to_vec();
        let mut dup = docs[0].clone();
        dup.id = "zz-dup".into();
        docs.push(dup);
        let store = with_docs(&store, docs);
        let src = store.documents()[0].id.clone();
        let raw = Scorer::new(&store, opts(InferenceMode::Sdr, false, 1)).unwrap().rank(&src).unwrap();
        let top = raw.entries.iter().find(|e| e.id == "zz-dup").unwrap();
        prop_assert!((top.score - 1.0).abs() < 1e-6);
        prop_assert!(raw.entries.iter().all(|e| e.score <= top.score + 1e-12));
    }
}

#[test]
fn worker_count_does_not_change_results() {
    for seed in 0..20 {
        let store = store_from_seed(seed);
        for mode in [
            InferenceMode::Sdr,
            InferenceMode::Paragraph,
            InferenceMode::All,
            InferenceMode::First,
        ] {
            let one = Scorer::new(&store, opts(mode, true, 1))
                .unwrap()
                .rank_all()
                .unwrap();
            for workers in [2, 8] {
                let many = Scorer::new(&store, opts(mode, true, workers))
                    .unwrap()
                    .rank_all()
                    .unwrap();
                assert_eq!(one, many);
            }
        }
    }
}

#[test]
fn source_is_never_its_own_candidate_and_ties_break_by_id() {
    let v = |xs: &[f32]| Vector::new(xs.to_vec()).unwrap();
    let doc = |id: &str| EmbeddedDocument {
        id: id.into(),
        paragraphs: vec![vec![v(&[1.0, 0.0])]],
        cls: None,
    };
    let store = EmbeddedCorpus::new(2, vec![doc("c"), doc("a"), doc("s"), doc("b")]).unwrap();
    let list = Scorer::new(&store, opts(InferenceMode::Sdr, true, 1))
        .unwrap()
        .rank("s")
        .unwrap();
    assert_eq!(list.ids().collect::<Vec<_>>(), ["a", "b", "c"]);
    assert!(list.entries.iter().all(|e| e.score == 0.0));
}

#[test]
fn rank_report_round_trips() {
    let store = store_from_seed(3);
    let mut o = opts(InferenceMode::Sdr, true, 1);
    o.explain = true;
    let lists = Scorer::new(&store, o).unwrap().rank_all().unwrap();
    let mut buf = Vec::new();
    write_rank_report(&lists, &mut buf).unwrap();
    let back = read_rank_report(&buf[..]).unwrap();
    assert_eq!(back, lists);
}

#[test]
fn cls_mode_requires_vectors() {
    let store = store_from_seed(1);
    assert!(Scorer::new(&store, opts(InferenceMode::Cls, true, 1)).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let docs = store
        .documents()
        .iter()
        .map(|d| EmbeddedDocument {
            cls: Some(common::random_vector(&mut rng, store.dimension())),
            ..d.clone()
        })
        .collect();
    let with_cls = with_docs(&store, docs);
    let list = Scorer::new(&with_cls, opts(InferenceMode::Cls, true, 1))
        .unwrap()
        .rank("d0")
        .unwrap();
    let s = common::to_f64(with_cls.get("d0").unwrap().cls.as_ref().unwrap());
    for e in &list.entries {
        let c = common::to_f64(with_cls.get(&e.id).unwrap().cls.as_ref().unwrap());
        assert!((e.score - common::cos64(&s, &c)).abs() < 1e-9);
    }
}

#[test]
fn one_dimensional_candidates_can_tie_the_duplicate() {
    let v = |x: f32| Vector::new(vec![x]).unwrap();
    let doc = |id: &str, xs: &[f32]| EmbeddedDocument {
        id: id.into(),
        paragraphs: vec![xs.iter().map(|&x| v(x)).collect()],
        cls: None,
    };
    // parallel to the source in every sentence, so indistinguishable under cosine
    let store = EmbeddedCorpus::new(
        1,
        vec![
            doc("s", &[1.0, -2.0]),
            doc("dup", &[1.0, -2.0]),
            doc("a", &[3.0, -0.5]),
            doc("b", &[-1.0]),
        ],
    )
    .unwrap();
    let list = Scorer::new(&store, opts(InferenceMode::Sdr, true, 1))
        .unwrap()
        .rank("s")
        .unwrap();
    assert_eq!(
        list.entries[0].score,
        list.rank_of("dup")
            .map(|r| list.entries[r - 1].score)
            .unwrap()
    );
    assert_eq!(list.ids().collect::<Vec<_>>(), ["a", "dup", "b"]);
}
