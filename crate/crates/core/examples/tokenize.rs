//! Lex a Java snippet and show the token stream, its canonical rendering and
//! the style-insensitive form used for exact-match scoring.
//!
//!     cargo run --example tokenize

use divot_forge::lexer::{canonical, normalize_for_match, tokenize, LanguageProfile};

const SRC: &str = r#"public String greet(String name) {
    // say hello
    return "Hello, " + name + "!";   /* trailing */
}
"#;

fn main() {
    let java = LanguageProfile::java();
    for tok in tokenize(SRC, java) {
        println!("{:>3}..{:<3} {:<12?} {}", tok.span.start, tok.span.end, tok.kind, tok.text);
    }
    println!();
    println!("canonical:  {}", canonical(SRC, java));
    println!("normalized: {}", normalize_for_match(SRC, java));
}
