//! Score model output against references with EM, BLEU-4, SARI and partial
//! CodeBLEU.
//!
//!     cargo run --example score

use divot_forge::lexer::LanguageProfile;
use divot_forge::metrics::{bleu4, codebleu, exact_match, sari, score_lines, CodeBleuWeights, ScoreOptions};

fn main() -> divot_forge::Result<()> {
    let java = LanguageProfile::java();
    let src = "if ( x == null ) return ;";
    let gold = "if ( x == null ) { return ; }";
    let pred = "if ( x == null ) return 0 ;";

    println!("em        {}", exact_match(pred, gold, true, java));
    println!("bleu4     {:.2}", bleu4(pred, gold));
    let s = sari(src, pred, gold);
    println!("sari      {:.4} (add {:.3}, keep {:.3}, del {:.3})", s.value, s.add_f1, s.keep_f1, s.del_precision);
    let cb = codebleu(pred, gold, java, CodeBleuWeights::default());
    println!("codebleu  {:.4} from {:?}, absent {:?}", cb.value, cb.components, cb.absent);

    let lines = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let opts = ScoreOptions {
        profile: java.clone(),
        ..Default::default()
    };
    let report = score_lines(&lines(&[pred, gold]), &lines(&[gold, gold]), Some(&lines(&[src, src])), &opts)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
