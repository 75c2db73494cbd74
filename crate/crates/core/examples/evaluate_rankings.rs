// Compute MPR, MRR and HR@k for hand-made rankings.

use docsim::eval::{evaluate, GroundTruth};
use docsim::scoring::{RankedEntry, RankedList};

fn list(source: &str, ids: &[&str]) -> RankedList {
    RankedList {
        source: source.into(),
        entries: ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                id: id.to_string(),
                score: -(i as f64),
                explain: None,
            })
            .collect(),
    }
}

pub fn run_example() -> anyhow::Result<()> {
    let mut gt = GroundTruth::new();
    gt.insert("q1", ["b"])?;
    gt.insert("q2", ["a", "d"])?;

    let rankings = vec![
        list("q1", &["a", "b", "c", "d", "e"]),
        list("q2", &["c", "a", "b", "e", "d"]),
    ];
    let report = evaluate(&rankings, &gt, &[1, 2])?;
    println!("{}", serde_json::to_string_pretty(&report.aggregate)?);
    for s in &report.per_source {
        println!(
            "{}: ranks {:?}, mpr {:.3}, mrr {:.3}",
            s.source, s.true_ranks, s.mpr, s.mrr
        );
    }
    // q1: b at rank 2 of 5; q2: a at 2, d at 5.
    anyhow::ensure!((report.aggregate.mrr - 0.5).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
