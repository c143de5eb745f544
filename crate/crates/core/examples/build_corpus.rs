//! Build a corpus from a JSONL file of edit records and print its statistics.
//!
//!     cargo run --example build_corpus [records.jsonl] [out.jsonl]
//!
//! Without arguments it uses the bundled 500-record fixture and a temporary
//! output file.

use std::path::PathBuf;

use divot_forge::corpus::{build, ingest, stats_path, BuildConfig};

fn main() -> divot_forge::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/commits500.jsonl"));
    let tmp = tempfile::tempdir().expect("temp dir");
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| tmp.path().join("corpus.jsonl"));

    let ingested = ingest(&input)?;
    println!("{} records, {} skipped lines", ingested.records.len(), ingested.warnings.len());
    let cfg = BuildConfig {
        global_seed: 7,
        ..Default::default()
    };
    let stats = build(ingested.records, &cfg, &out)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    println!("corpus: {}\nstats:  {}", out.display(), stats_path(&out).display());

    let first = std::fs::read_to_string(&out).expect("corpus written");
    if let Some(line) = first.lines().next() {
        println!("first sample: {line}");
    }
    Ok(())
}
