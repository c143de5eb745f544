mod common;

use common::bleu_oracle;
use divot_forge::lexer::LanguageProfile;
use divot_forge::metrics::{
    bleu4, codebleu, corpus_bleu4, exact_match, sari, score_files, CodeBleuWeights, Metric, ScoreOptions,
};
use divot_forge::Error;
use proptest::prelude::*;

fn sentence(max_len: usize, alphabet: u8) -> impl Strategy<Value = String> {
    prop::collection::vec((0..alphabet).prop_map(|b| ((b'a' + b) as char).to_string()), 0..=max_len)
        .prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bleu_matches_oracle(c in sentence(10, 6), r in sentence(10, 6)) {
        prop_assert!((bleu4(&c, &r) - bleu_oracle(&c, &r)).abs() <= 1e-9);
    }

    #[test]
    fn bleu_in_range_and_perfect_on_identity(c in sentence(12, 4), r in sentence(12, 4)) {
        let b = bleu4(&c, &r);
        prop_assert!((0.0..=100.0).contains(&b));
        if c.split(' ').count() >= 4 {
            prop_assert_eq!(bleu4(&c, &c), 100.0);
        }
    }

    #[test]
    fn sari_components_in_unit_interval(s in sentence(10, 4), c in sentence(10, 4), r in sentence(10, 4)) {
        let v = sari(&s, &c, &r);
        for x in [v.value, v.add_f1, v.keep_f1, v.del_precision] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert_eq!(v.value, (v.add_f1 + v.keep_f1 + v.del_precision) / 3.0);
        prop_assert_eq!(sari(&s, &r, &r).value, 1.0);
    }

    #[test]
    fn sari_ignores_token_names(s in sentence(10, 4), c in sentence(10, 4), r in sentence(10, 4), shift in 1u8..4) {
        let rename = |x: &str| -> String {
            x.split_whitespace()
                .map(|t| (((t.as_bytes()[0] - b'a' + shift) % 4 + b'p') as char).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        prop_assert_eq!(sari(&s, &c, &r), sari(&rename(&s), &rename(&c), &rename(&r)));
    }

    #[test]
    fn em_is_reflexive(x in "[ -~]{0,40}") {
        prop_assert!(exact_match(&x, &x, false, LanguageProfile::generic()));
        prop_assert!(exact_match(&x, &x, true, LanguageProfile::java()));
    }

    #[test]
    fn codebleu_reduces_to_bleu(c in sentence(10, 6), r in sentence(10, 6)) {
        let w = CodeBleuWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        prop_assert_eq!(codebleu(&c, &r, LanguageProfile::java(), w).value, bleu4(&c, &r) / 100.0);
        let s = codebleu(&c, &r, LanguageProfile::java(), CodeBleuWeights::default());
        prop_assert!((0.0..=1.0).contains(&s.value));
    }
}

#[test]
fn sari_candidate_equal_to_source() {
    // order 1: add F1 0, keep F1 0.8, del 1; orders 2-3: add 0, keep 0, del 1;
    // order 4: nothing to add, keep or delete, so 1 each
    let s = sari("a b c", "a b c", "a d c");
    assert_eq!(s.add_f1, 0.25);
    assert!((s.keep_f1 - 0.45).abs() < 1e-15);
    assert_eq!(s.del_precision, 1.0);
    assert!((s.value - 1.7 / 3.0).abs() < 1e-15);
}

#[test]
fn keyword_divergence_hurts_weighted_bleu_more() {
    let java = LanguageProfile::java();
    let (cand, reference) = ("public void f ( )", "static void f ( )");
    let s = codebleu(cand, reference, java, CodeBleuWeights::default());
    // unigram precision 4/5 plain, (4+1+1+1)/(4+4+1+1+1) = 7/11 keyword-weighted;
    // higher orders 4/5, 3/4, 2/3 in both
    let tail = (0.8f64).ln() + (0.75f64).ln() + (2.0f64 / 3.0).ln();
    let plain = (((0.8f64).ln() + tail) / 4.0).exp();
    let weighted = (((7.0f64 / 11.0).ln() + tail) / 4.0).exp();
    assert!((s.components["bleu"] - plain).abs() < 1e-12);
    assert!((s.components["weighted_bleu"] - weighted).abs() < 1e-12);
    assert!(s.components["weighted_bleu"] < s.components["bleu"]);
    assert!((s.value - (plain + weighted) / 2.0).abs() < 1e-12);
    assert_eq!(s.weights_used["bleu"], 0.5);
}

#[test]
fn corpus_bleu_differs_from_sentence_mean() {
    let pairs = [("a b c d", "a b c d"), ("x", "a b c d e")];
    let sentence = (bleu4(pairs[0].0, pairs[0].1) + bleu4(pairs[1].0, pairs[1].1)) / 2.0;
    let corpus = corpus_bleu4(pairs);
    assert!(corpus > 0.0 && (corpus - sentence).abs() > 1e-6);
}

fn write(dir: &std::path::Path, name: &str, lines: &[&str]) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, lines.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    p
}

#[test]
fn score_files_examples() {
    let dir = tempfile::tempdir().unwrap();
    let gold = write(dir.path(), "gold.txt", &["int x = 1 ;", "return y + 2 ;"]);
    let src = write(dir.path(), "src.txt", &["int x = 0 ;", "return y ;"]);
    let opts = ScoreOptions::default();

    let r = score_files(&gold, &gold, Some(&src), &opts).unwrap();
    assert_eq!((r.em, r.bleu4, r.n_examples), (Some(1.0), Some(100.0), 2));
    assert_eq!(r.sari.unwrap().value, 1.0);
    assert_eq!(r.codebleu.unwrap().value, 1.0);

    let pred = write(dir.path(), "pred.txt", &["int x = 1 ;", "return y ;"]);
    let r = score_files(&pred, &gold, Some(&src), &opts).unwrap();
    assert_eq!(r.em, Some(0.5));
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["bleu_aggregation"], "sentence");
    assert_eq!(json["codebleu"]["absent"], serde_json::json!(["ast_match", "dataflow_match"]));

    let short = write(dir.path(), "short.txt", &["int x = 1 ;"]);
    assert!(matches!(score_files(&short, &gold, None, &opts), Err(Error::LengthMismatch { .. })));
    assert!(matches!(score_files(&gold, &gold, Some(&short), &opts), Err(Error::LengthMismatch { .. })));
}

#[test]
fn normalized_scoring_ignores_style() {
    let dir = tempfile::tempdir().unwrap();
    let gold = write(dir.path(), "gold.txt", &["int x = 1; // set"]);
    let pred = write(dir.path(), "pred.txt", &["INT   x = 1;"]);
    let em_only = ScoreOptions {
        metrics: Some([Metric::Em].into()),
        ..Default::default()
    };
    assert_eq!(score_files(&pred, &gold, None, &em_only).unwrap().em, Some(0.0));
    let normalized = ScoreOptions {
        normalize: true,
        ..em_only
    };
    assert_eq!(score_files(&pred, &gold, None, &normalized).unwrap().em, Some(1.0));
}
