mod segment_text {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/segment_text.rs"
    ));
}

#[test]
fn segment_text_example_runs() {
    segment_text::run_example().expect("segment_text example should run");
}

mod rank_documents {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/rank_documents.rs"
    ));
}

#[test]
fn rank_documents_example_runs() {
    rank_documents::run_example().expect("rank_documents example should run");
}

mod embedding_store {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/embedding_store.rs"
    ));
}

#[test]
fn embedding_store_example_runs() {
    embedding_store::run_example().expect("embedding_store example should run");
}

mod train_toy {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/train_toy.rs"
    ));
}

#[test]
fn train_toy_example_runs() {
    train_toy::run_example().expect("train_toy example should run");
}

mod evaluate_rankings {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/evaluate_rankings.rs"
    ));
}

#[test]
fn evaluate_rankings_example_runs() {
    evaluate_rankings::run_example().expect("evaluate_rankings example should run");
}

mod ablation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ablation.rs"));
}

#[test]
fn ablation_example_runs() {
    ablation::run_example().expect("ablation example should run");
}
