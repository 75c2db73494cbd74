// Embed a small corpus with the hash provider and rank it against a source,
// with a per-paragraph explanation of the winner.

use docsim::corpus::{Corpus, Document};
use docsim::embedding::{embed_corpus, HashEmbedder};
use docsim::scoring::{InferenceMode, RankOptions, Scorer};

fn corpus() -> anyhow::Result<Corpus> {
    let docs = vec![
        Document::from_sections(
            "volcano",
            "Volcano",
            &[
                "Lava rose from the crater. Ash covered the valley.",
                "Villagers left their farms. The eruption lasted a week.",
            ],
        ),
        Document::from_sections(
            "eruption",
            "Eruption",
            &[
                "The eruption lasted a week. Farms in the valley were abandoned.",
                "Ash covered the valley for months.",
            ],
        ),
        Document::from_sections(
            "harbor",
            "Harbor",
            &["Ships unloaded grain at the harbor. Sailors rested in taverns."],
        ),
        Document::from_sections(
            "orchard",
            "Orchard",
            &["Apples ripened in the orchard. Pickers worked from dawn."],
        ),
    ];
    Ok(Corpus::new(docs)?)
}

pub fn run_example() -> anyhow::Result<()> {
    let corpus = corpus()?;
    let store = embed_corpus(&HashEmbedder::new(64, 7), &corpus, 1)?;

    for mode in [InferenceMode::Sdr, InferenceMode::All] {
        let options = RankOptions {
            mode,
            explain: mode == InferenceMode::Sdr,
            ..RankOptions::default()
        };
        let list = Scorer::new(&store, options)?.rank("volcano")?;
        println!("mode {}", mode.name());
        for (i, e) in list.entries.iter().enumerate() {
            println!("  {}. {:<10} {:.4}", i + 1, e.id, e.score);
        }
        if let Some(explain) = list.entries[0].explain.as_ref() {
            for m in explain {
                println!(
                    "    source paragraph {} -> candidate paragraph {} (raw {:.3})",
                    m.i, m.j, m.raw
                );
            }
        }
        anyhow::ensure!(list.entries[0].id == "eruption");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
