use docsim::corpus::{Corpus, Document};
use docsim::synthetic::{topic_corpus, TopicCorpusConfig};
use docsim::training::{
    contrastive_grad, contrastive_loss, evaluate_pairs, train_toy, ContrastiveConfig, PairLabel,
    PairSampler, ToyModel, TrainingError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(seed: u64) -> Corpus {
    topic_corpus(&TopicCorpusConfig {
        seed,
        ..TopicCorpusConfig::default()
    })
    .corpus
}

#[test]
fn sampler_draws_half_intra_pairs() {
    let corpus = synthetic(4);
    let sampler = PairSampler::new(&corpus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 10_000;
    let intra = (0..n)
        .filter(|_| sampler.sample(&mut rng).label == PairLabel::Intra)
        .count();
    let frac = intra as f64 / n as f64;
    assert!((frac - 0.5).abs() <= 0.02, "intra fraction {frac}");
}

#[test]
fn labels_agree_with_pair_positions() {
    let corpus = synthetic(5);
    let sampler = PairSampler::new(&corpus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5_000 {
        let pair = sampler.sample(&mut rng);
        let (p, q) = (pair.p, pair.q);
        let sentences = |r: docsim::training::SentenceRef| {
            corpus.documents()[r.document].paragraphs[r.paragraph]
                .sentences
                .len()
        };
        assert!(p.sentence < sentences(p) && q.sentence < sentences(q));
        match pair.label {
            PairLabel::Intra => {
                assert_eq!((p.document, p.paragraph), (q.document, q.paragraph));
                assert_ne!(p.sentence, q.sentence);
                assert_eq!(pair.label.y(), 1);
            }
            PairLabel::Inter => {
                assert_ne!(p.document, q.document);
                assert_eq!(pair.label.y(), 0);
            }
        }
    }
}

#[test]
fn sampler_rejects_unusable_corpora() {
    let single = Corpus::new(vec![Document::from_sections("a", "", &["One. Two."])]).unwrap();
    assert!(matches!(
        PairSampler::new(&single),
        Err(TrainingError::TooFewDocuments)
    ));
    let no_multi = Corpus::new(vec![
        Document::from_sections("a", "", &["One."]),
        Document::from_sections("b", "", &["Two."]),
    ])
    .unwrap();
    assert!(matches!(
        PairSampler::new(&no_multi),
        Err(TrainingError::NoMultiSentenceParagraph)
    ));
    assert!(PairSampler::with_intra_probability(&no_multi, 0.0).is_ok());
}

fn cos(p: &[f64], q: &[f64]) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np = p.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nq = q.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (np * nq)
}

#[test]
fn loss_values_by_hand() {
    let a = [1.0, 0.0];
    let b = [0.0, 2.0];
    let c = [3.0, 0.0];
    assert_eq!(
        contrastive_loss(&a, &c, PairLabel::Intra, 1.0).unwrap(),
        0.0
    );
    assert_eq!(
        contrastive_loss(&a, &b, PairLabel::Intra, 1.0).unwrap(),
        1.0
    );
    // margin 1: the hinge sits at cos = 0
    assert_eq!(
        contrastive_loss(&a, &b, PairLabel::Inter, 1.0).unwrap(),
        0.0
    );
    assert_eq!(
        contrastive_loss(&a, &c, PairLabel::Inter, 1.0).unwrap(),
        1.0
    );
    assert!((contrastive_loss(&a, &c, PairLabel::Inter, 0.5).unwrap() - 0.5).abs() < 1e-15);
    let (gp, gq) = contrastive_grad(&a, &b, PairLabel::Inter, 1.0).unwrap();
    assert!(gp.iter().chain(&gq).all(|&g| g == 0.0));
    assert!(contrastive_loss(&[0.0, 0.0], &a, PairLabel::Intra, 1.0).is_err());
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = 1e-4;
    let mut checked = 0;
    while checked < 200 {
        let d = rng.random_range(2..=8);
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let margin = rng.random_range(0.2..=2.0);
        let label = if rng.random_bool(0.5) {
            PairLabel::Intra
        } else {
            PairLabel::Inter
        };
        if label == PairLabel::Inter && (cos(&p, &q) - (1.0 - margin)).abs() < 0.05 {
            continue;
        }
        let (gp, gq) = contrastive_grad(&p, &q, label, margin).unwrap();
        let f = |p: &[f64], q: &[f64]| contrastive_loss(p, q, label, margin).unwrap();
        let mut num = Vec::new();
        for k in 0..d {
            let (mut a, mut b) = (p.clone(), p.clone());
            a[k] += h;
            b[k] -= h;
            num.push((f(&a, &q) - f(&b, &q)) / (2.0 * h));
        }
        for k in 0..d {
            let (mut a, mut b) = (q.clone(), q.clone());
            a[k] += h;
            b[k] -= h;
            num.push((f(&p, &a) - f(&p, &b)) / (2.0 * h));
        }
        let ana: Vec<f64> = gp.into_iter().chain(gq).collect();
        let diff = ana
            .iter()
            .zip(&num)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = ana
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(num.iter().map(|a| a * a).sum::<f64>().sqrt());
        if scale > 0.0 {
            assert!(
                diff / scale <= 1e-4,
                "relative error {} at d={d}",
                diff / scale
            );
        } else {
            assert_eq!(diff, 0.0);
        }
        checked += 1;
    }
}

#[test]
fn same_seed_gives_identical_weights() {
    let corpus = synthetic(6);
    let cfg = ContrastiveConfig {
        steps: 300,
        seed: 9,
        ..ContrastiveConfig::default()
    };
    let a = train_toy(&corpus, &cfg).unwrap();
    let b = train_toy(&corpus, &cfg).unwrap();
    assert_eq!(a.model.weights(), b.model.weights());
    assert_eq!(a.trace, b.trace);
    let c = train_toy(&corpus, &ContrastiveConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.model.weights(), c.model.weights());
}

#[test]
fn zero_learning_rate_leaves_model_at_init() {
    let corpus = synthetic(7);
    let cfg = ContrastiveConfig {
        learning_rate: 0.0,
        steps: 200,
        seed: 2,
        log_every: 50,
        ..ContrastiveConfig::default()
    };
    let out = train_toy(&corpus, &cfg).unwrap();
    let none = train_toy(
        &corpus,
        &ContrastiveConfig {
            steps: 0,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(out.model.weights(), none.model.weights());
    let first = &out.trace[0];
    assert!(out
        .trace
        .iter()
        .all(|r| r.loss == first.loss && r.mean_intra_cos == first.mean_intra_cos));
    assert_eq!(
        out.trace.iter().map(|r| r.step).collect::<Vec<_>>(),
        [0, 50, 100, 150, 200]
    );
}

#[test]
fn intra_only_training_pulls_paragraph_mates_together() {
    let corpus = synthetic(8);
    let cfg = ContrastiveConfig {
        intra_probability: 1.0,
        steps: 500,
        seed: 1,
        ..ContrastiveConfig::default()
    };
    let before = {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        ToyModel::init(&corpus, cfg.dimension, &mut rng)
    };
    let after = train_toy(&corpus, &cfg).unwrap().model;
    let s0 = evaluate_pairs(&before, &corpus, 1000, cfg.margin, 3).unwrap();
    let s1 = evaluate_pairs(&after, &corpus, 1000, cfg.margin, 3).unwrap();
    assert!(
        s1.mean_intra_cos > s0.mean_intra_cos + 0.1,
        "{s0:?} -> {s1:?}"
    );
}

#[test]
fn invalid_configs_are_rejected_before_training() {
    let corpus = synthetic(1);
    for cfg in [
        ContrastiveConfig {
            margin: 0.0,
            ..Default::default()
        },
        ContrastiveConfig {
            margin: 2.5,
            ..Default::default()
        },
        ContrastiveConfig {
            learning_rate: f64::NAN,
            ..Default::default()
        },
        ContrastiveConfig {
            dimension: 1,
            ..Default::default()
        },
        ContrastiveConfig {
            log_every: 0,
            ..Default::default()
        },
    ] {
        assert!(
            matches!(
                train_toy(&corpus, &cfg),
                Err(TrainingError::InvalidConfig(_))
            ),
            "{cfg:?}"
        );
    }
}

#[test]
fn huge_learning_rate_is_reported_or_survives() {
    let corpus = synthetic(2);
    let cfg = ContrastiveConfig {
        learning_rate: 1e30,
        steps: 50,
        ..ContrastiveConfig::default()
    };
    match train_toy(&corpus, &cfg) {
        Ok(out) => assert!(out.model.weights().iter().all(|w| w.is_finite())),
        Err(e) => assert!(matches!(e, TrainingError::Diverged { .. }), "{e:?}"),
    }
}

#[test]
fn checkpoint_round_trips() {
    let corpus = synthetic(3);
    let out = train_toy(
        &corpus,
        &ContrastiveConfig {
            steps: 100,
            ..Default::default()
        },
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.model.save(dir.path()).unwrap();
    assert_eq!(ToyModel::load(dir.path()).unwrap(), out.model);
    std::fs::write(dir.path().join("vocab.txt"), "only\n").unwrap();
    assert!(ToyModel::load(dir.path()).is_err());
}
