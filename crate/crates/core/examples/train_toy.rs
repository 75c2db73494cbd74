// Train the bag-of-tokens model on a synthetic topic corpus and compare
// intra- and inter-document sentence cosines on held-out documents.

use docsim::synthetic::{topic_corpus, TopicCorpusConfig};
use docsim::training::{evaluate_pairs, train_toy, ContrastiveConfig};

pub fn run_example() -> anyhow::Result<()> {
    let train = topic_corpus(&TopicCorpusConfig {
        seed: 1,
        ..TopicCorpusConfig::default()
    });
    let held = topic_corpus(&TopicCorpusConfig {
        seed: 2,
        id_prefix: "held".into(),
        ..TopicCorpusConfig::default()
    });
    let cfg = ContrastiveConfig {
        seed: 3,
        steps: 2000,
        log_every: 500,
        ..ContrastiveConfig::default()
    };

    let out = train_toy(&train.corpus, &cfg)?;
    for row in &out.trace {
        println!(
            "step {:>5}  loss {:.4}  intra {:.3}  inter {:.3}",
            row.step, row.loss, row.mean_intra_cos, row.mean_inter_cos
        );
    }
    let stats = evaluate_pairs(&out.model, &held.corpus, 2000, cfg.margin, 11)?;
    println!(
        "held-out: intra {:.3}, inter {:.3}, gap {:.3}",
        stats.mean_intra_cos,
        stats.mean_inter_cos,
        stats.gap()
    );
    anyhow::ensure!(stats.gap() > 0.3);

    let dir = tempfile::tempdir()?;
    out.model.save(dir.path())?;
    let reloaded = docsim::training::ToyModel::load(dir.path())?;
    anyhow::ensure!(reloaded.weights() == out.model.weights());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
