//! The three token-noising tasks on one edit: keep-span masking, random span
//! masking and denoising. Every sample targets the new code.
//!
//!     cargo run --example noising [seed]

use divot_forge::lexer::LanguageProfile;
use divot_forge::noising::{dae_sample, ksm_sample, rm_sample, EditPair, NoiseConfig, Task};
use divot_forge::seed::derive_seed;

fn main() {
    let global: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let pair = EditPair::new(
        "example-1",
        "public int size() { return items.length; }",
        "public int size() { return items == null ? 0 : items.length; }",
        Some("guard against null items"),
        LanguageProfile::java(),
    );
    let cfg = NoiseConfig::default();
    let script = pair.script();
    let seed = |task| derive_seed(global, &pair.record_id, task);

    let samples = [
        ksm_sample(&pair, &script, &cfg, seed(Task::Ksm)),
        rm_sample(&pair, &cfg, seed(Task::Rm)),
        dae_sample(&pair, &cfg, seed(Task::Dae)),
    ];
    for s in samples {
        let s = s.expect("this edit keeps tokens and is short");
        println!("{}\n  input:  {}\n  target: {}\n", s.task, s.input, s.target);
    }
}
