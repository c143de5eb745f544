//! Token-level edit script between two versions of a method, plus the
//! line hunks the evolution path is built from.
//!
//!     cargo run --example token_diff

use divot_forge::diff::{apply_script, line_diff_hunks, token_diff, EditKind};
use divot_forge::lexer::{code_tokens, LanguageProfile};

const OLD: &str = "int total(int[] xs) {\n    int s = 0;\n    for (int x : xs) s += x;\n    return s;\n}\n";
const NEW: &str = "long total(int[] xs) {\n    long s = 0;\n    for (int x : xs) s += x;\n    return s;\n}\n";

fn main() {
    let java = LanguageProfile::java();
    let (old, new) = (code_tokens(OLD, java), code_tokens(NEW, java));
    let script = token_diff(&old, &new);
    for op in &script.ops {
        let mark = match op.kind {
            EditKind::Keep => ' ',
            EditKind::Delete => '-',
            EditKind::Insert => '+',
        };
        println!("{mark} {}", op.tokens.join(" "));
    }
    println!("cost {} with {} tokens kept", script.cost(), script.keep_count());

    let old_text: Vec<&str> = old.iter().map(|t| t.text.as_str()).collect();
    let rebuilt = apply_script(&old_text, &script).expect("script matches its own input");
    assert_eq!(rebuilt, new.iter().map(|t| t.text.clone()).collect::<Vec<_>>());

    for gap in [1, 3] {
        let hunks = line_diff_hunks(OLD, NEW, gap);
        println!("gap {gap}: {}", serde_json::to_string(&hunks).unwrap());
    }
}
