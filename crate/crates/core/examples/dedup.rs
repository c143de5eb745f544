//! Drop pre-training records that contain code from an evaluation set.
//! Matching is substring containment after collapsing whitespace.
//!
//!     cargo run --example dedup

use divot_forge::corpus::{dedup_filter, CorpusRecord};

fn record(id: &str, old: &str, new: &str) -> CorpusRecord {
    CorpusRecord {
        id: id.into(),
        old: old.into(),
        new: new.into(),
        nl: None,
        lang: "java".into(),
    }
}

fn main() -> divot_forge::Result<()> {
    let records = vec![
        record("clean", "int a = 1;", "int a = 2;"),
        record("leaks-new", "x();", "if (ready) {\n    start();\n}"),
        record("leaks-old", "log(msg); flush();", "log(msg);"),
    ];
    let dir = tempfile::tempdir().expect("temp dir");
    let test_set = dir.path().join("test.jsonl");
    std::fs::write(
        &test_set,
        "{\"code\": \"if (ready) { start(); }\"}\n\"flush();\"\n",
    )
    .expect("write test set");

    let outcome = dedup_filter(records, &[test_set])?;
    println!("kept:    {:?}", outcome.kept.iter().map(|r| &r.id).collect::<Vec<_>>());
    println!("dropped: {:?}", outcome.dropped);
    Ok(())
}
