// Run every inference variant over a synthetic corpus with boilerplate
// paragraphs and print a metrics table.

use docsim::embedding::{embed_corpus, HashEmbedder};
use docsim::eval::evaluate;
use docsim::scoring::{InferenceMode, RankOptions, Scorer};
use docsim::synthetic::{topic_corpus, TopicCorpusConfig};

pub fn run_example() -> anyhow::Result<()> {
    let synth = topic_corpus(&TopicCorpusConfig::with_boilerplate(0));
    let store = embed_corpus(&HashEmbedder::new(64, 7), &synth.corpus, 4)?;

    let variants = [
        ("full", InferenceMode::Sdr, true),
        ("no-normalization", InferenceMode::Sdr, false),
        ("paragraph-level", InferenceMode::Paragraph, true),
        ("first", InferenceMode::First, true),
        ("all", InferenceMode::All, true),
    ];
    println!("{:<18} {:>6} {:>6} {:>6}", "variant", "mpr", "mrr", "hr@5");
    for (name, mode, normalize) in variants {
        let scorer = Scorer::new(
            &store,
            RankOptions {
                mode,
                normalize,
                workers: 4,
                ..RankOptions::default()
            },
        )?;
        let lists = scorer.rank_all()?;
        let m = evaluate(&lists, &synth.ground_truth, &[5])?.aggregate;
        println!(
            "{:<18} {:>6.3} {:>6.3} {:>6.3}",
            name, m.mpr, m.mrr, m.hr[&5]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
