// Write embeddings to the binary store and the JSONL debug store, read them
// back, and serve them through a store-backed provider.

use docsim::corpus::{Corpus, Document};
use docsim::embedding::{
    embed_corpus, load_embeddings, save_embeddings, save_embeddings_jsonl, EmbeddingProvider,
    HashEmbedder, SentenceKey, StoreProvider,
};

pub fn run_example() -> anyhow::Result<()> {
    let corpus = Corpus::new(vec![
        Document::from_sections(
            "a",
            "A",
            &["One sentence here. Another one.", "A second paragraph."],
        ),
        Document::from_sections("b", "B", &["Short document."]),
    ])?;
    let store = embed_corpus(&HashEmbedder::new(16, 3), &corpus, 2)?;

    let dir = tempfile::tempdir()?;
    let bin = dir.path().join("vectors.sdre");
    let jsonl = dir.path().join("vectors.jsonl");
    save_embeddings(&store, &bin)?;
    save_embeddings_jsonl(&store, &jsonl)?;
    println!("binary store: {} bytes", std::fs::metadata(&bin)?.len());
    println!("jsonl store:  {} bytes", std::fs::metadata(&jsonl)?.len());

    // Either file loads through the same call; the format is detected.
    let from_bin = load_embeddings(&bin)?;
    let from_jsonl = load_embeddings(&jsonl)?;
    anyhow::ensure!(from_bin == store && from_jsonl == store);
    from_bin.check_shape(&corpus)?;

    let provider = StoreProvider::new(from_bin);
    let key = SentenceKey {
        document: "a",
        paragraph: 0,
        sentence: 1,
    };
    let v = provider.embed(key, "Another one.")?;
    println!(
        "a/0/1 -> dim {}, first component {:.5}",
        v.dim(),
        v.as_slice()[0]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
