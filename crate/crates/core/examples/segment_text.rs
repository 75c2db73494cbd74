// Split raw text into paragraphs and sentences, then build a document.

use docsim::corpus::{segment_paragraphs, segment_sentences, Document};

const TEXT: &str = "Dr. Reyes opened the archive at 9 a.m. sharp. Nobody else came.

The shelves held approx. 4,000 maps, e.g. coastal charts. \"Are they complete?\" she wondered.


Most were not.";

pub fn run_example() -> anyhow::Result<()> {
    let paragraphs = segment_paragraphs(TEXT);
    anyhow::ensure!(
        paragraphs.len() == 3,
        "expected 3 paragraphs, got {}",
        paragraphs.len()
    );
    for (i, p) in paragraphs.iter().enumerate() {
        println!("paragraph {i}");
        for s in segment_sentences(p) {
            println!("  [{}] {}", s.index_in_paragraph, s.text);
        }
    }

    let doc = Document::from_sections("archive", "The archive", &[TEXT]);
    println!(
        "{} paragraphs, {} sentences",
        doc.paragraphs.len(),
        doc.sentence_count()
    );
    anyhow::ensure!(doc.sentence_count() == 5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
