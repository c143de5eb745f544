//! Walk from old to new code one hunk at a time and print the EDR pairs.
//!
//!     cargo run --example evolution_path

use divot_forge::diff::line_diff_hunks;
use divot_forge::evolution::{build_path, edr_samples};
use divot_forge::lexer::LanguageProfile;

const OLD: &str = "Ca\n\n\n\nDa\n\n\n\nEa\n";
const NEW: &str = "Cb\n\n\n\nDb\n\n\n\nEb\n";

fn main() {
    let hunks = line_diff_hunks(OLD, NEW, 3);
    let path = build_path("walkthrough", OLD, &hunks, LanguageProfile::generic()).unwrap();
    let t = path.hunk_count();
    for k in 0..=t {
        println!("X_{} = {}", t - k, path.state(t - k));
    }
    println!();
    for s in edr_samples(&path, Some("switch every field to b"), None, 0) {
        println!("t={}  {}  ->  {}", s.t_index.unwrap(), s.input, s.target);
    }
}
