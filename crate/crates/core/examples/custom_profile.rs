//! Define a language profile in JSON (here: a small Python-like language)
//! and use it for lexing and diffing.
//!
//!     cargo run --example custom_profile

use divot_forge::diff::diff_texts;
use divot_forge::lexer::{canonical, code_tokens, LanguageProfile};

const PROFILE: &str = r##"{
    "name": "pyish",
    "line_comments": ["#"],
    "block_comments": [],
    "strings": [{"delim": "\"", "escape": "\\"}, {"delim": "'", "escape": "\\"}],
    "keywords": ["def", "return", "if", "else", "None", "for", "in"],
    "operators": ["**", "//", "==", "!=", "<=", ">=", "->", "+", "-", "*", "/", "=", "<", ">", "%"]
}"##;

fn main() -> divot_forge::Result<()> {
    let py = LanguageProfile::from_json(PROFILE)?;
    let old = "def area(r):  # circle\n    return 3.14 * r ** 2\n";
    let new = "def area(r: float) -> float:\n    return math.pi * r ** 2\n";

    println!("old: {}", canonical(old, &py));
    println!("new: {}", canonical(new, &py));
    let texts = |s: &str| code_tokens(s, &py).into_iter().map(|t| t.text).collect::<Vec<_>>();
    let script = diff_texts(&texts(old), &texts(new));
    println!("{}", serde_json::to_string(&script)?);

    // Invalid profiles are rejected up front.
    let bad = PROFILE.replace("\"**\",", "\"* *\",");
    println!("bad profile: {}", LanguageProfile::from_json(&bad).unwrap_err());
    Ok(())
}
