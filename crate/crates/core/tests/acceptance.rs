//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use divot_forge::cli::run_with;
use divot_forge::corpus::{self, build_to_writer, dedup_filter, BuildConfig, CorpusRecord};
use divot_forge::diff::{apply_script, diff_texts, token_diff};
use divot_forge::lexer::{canonical, code_tokens, tokenize, LanguageProfile};
use divot_forge::metrics::{bleu4, codebleu, sari, CodeBleuWeights};
use divot_forge::noising::{input_code, mask_budget, EditPair, NoiseConfig, Task, TrainingSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Check = fn() -> Result<String, String>;

fn main() {
    let checks: [(&str, Check); 9] = [
        ("diff optimality", diff_optimality),
        ("round-trip", round_trip),
        ("three-hunk walkthrough", walkthrough),
        ("masking budgets", masking_budgets),
        ("target invariance", target_invariance),
        ("determinism under parallelism", worker_determinism),
        ("dedup", dedup),
        ("metric oracles", metric_oracles),
        ("amplification audit", amplification),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(std::iter::once("divot-forge").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into(), String::from_utf8_lossy(&err).into())
}

fn parse_samples(bytes: &[u8]) -> Vec<TrainingSample> {
    std::str::from_utf8(bytes)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_jsonl(path: &Path, records: &[CorpusRecord]) {
    let body: String = records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap() + "\n")
        .collect();
    std::fs::write(path, body).unwrap();
}

fn diff_optimality() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let profile = LanguageProfile::generic();
    for case in 0..1000 {
        let alphabet = rng.random_range(1..=5);
        let a = random_tokens(&mut rng, 12, alphabet);
        let b = random_tokens(&mut rng, 12, alphabet);
        let script = token_diff(&tokenize(&a.join(" "), profile), &tokenize(&b.join(" "), profile));
        let want = edit_distance(&a, &b);
        ensure(script.cost() == want, || {
            format!("case {case}: {a:?} -> {b:?} cost {} but optimum {want}", script.cost())
        })?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("1000/1000 optimal in {:.3}s", took.as_secs_f64()))
}

fn round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..10_000 {
        let alphabet = rng.random_range(1..=8);
        let a = random_tokens(&mut rng, 30, alphabet);
        let b = random_tokens(&mut rng, 30, alphabet);
        let got = apply_script(&a, &diff_texts(&a, &b)).map_err(|e| format!("case {case}: {e}"))?;
        ensure(got == b, || format!("case {case}: {a:?} -> {b:?} gave {got:?}"))?;
    }
    let records = commits500();
    for r in &records {
        let profile = LanguageProfile::for_language(&r.lang);
        let (old, new) = (code_tokens(&r.old, profile), code_tokens(&r.new, profile));
        let old_text: Vec<&str> = old.iter().map(|t| t.text.as_str()).collect();
        let new_text: Vec<String> = new.iter().map(|t| t.text.clone()).collect();
        let got = apply_script(&old_text, &token_diff(&old, &new)).map_err(|e| format!("{}: {e}", r.id))?;
        ensure(got == new_text, || format!("record {} does not round-trip", r.id))?;
    }
    Ok(format!("10000 random pairs and {} fixture records", records.len()))
}

const FIG_OLD: &str = "Ca\n\n\n\nDa\n\n\n\nEa\n";
const FIG_NEW: &str = "Cb\n\n\n\nDb\n\n\n\nEb\n";

fn walkthrough() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let (old, new) = (dir.path().join("fig.txt"), dir.path().join("fig_new.txt"));
    std::fs::write(&old, FIG_OLD).unwrap();
    std::fs::write(&new, FIG_NEW).unwrap();
    let (code, out, err) = run_cli(&["evolve", "--old", old.to_str().unwrap(), "--new", new.to_str().unwrap()]);
    ensure(code == 0, || format!("evolve exited {code}: {err}"))?;
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let want = ["Ca Da Ea", "Cb Da Ea", "Cb Db Ea", "Cb Db Eb"];
    ensure(json["states"] == serde_json::json!(want), || format!("states {}", json["states"]))?;

    let input = dir.path().join("fig.jsonl");
    write_jsonl(
        &input,
        &[CorpusRecord {
            id: "fig2".into(),
            old: FIG_OLD.into(),
            new: FIG_NEW.into(),
            nl: None,
            lang: "generic".into(),
        }],
    );
    let out_path = dir.path().join("fig_corpus.jsonl");
    let (code, _, err) = run_cli(&["build", "--in", input.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    ensure(code == 0, || format!("build exited {code}: {err}"))?;
    let samples = parse_samples(&std::fs::read(&out_path).unwrap());
    let mut per_task: BTreeMap<String, usize> = BTreeMap::new();
    for s in &samples {
        *per_task.entry(s.task.to_string()).or_default() += 1;
    }
    let stats = corpus::stats(&out_path).unwrap();
    ensure(samples.len() == 6, || {
        format!(
            "states match, but build emitted {} samples {per_task:?} (expected 1 KSM + 1 RM + 1 DAE + 3 EDR); \
             task skips {:?}: every token changes, so KSM has no KEEP tokens to mask",
            samples.len(),
            stats.task_skips
        )
    })?;
    Ok(format!("states {want:?}; build emitted {per_task:?}"))
}

fn masking_budgets() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let records: Vec<CorpusRecord> = (0..10_000)
        .map(|i| {
            let hunks = rng.random_range(1..=3);
            synthetic_record(&mut rng, &format!("syn{i}"), hunks)
        })
        .collect();
    let noise = NoiseConfig::default();
    let mut sizes: HashMap<String, (usize, usize)> = HashMap::new();
    for r in &records {
        let pair = EditPair::new(&r.id, &r.old, &r.new, None, LanguageProfile::java());
        sizes.insert(r.id.clone(), (pair.old_tokens.len(), pair.script().keep_count()));
    }
    let cfg = BuildConfig {
        tasks_enabled: [Task::Ksm, Task::Rm].into_iter().collect(),
        ..Default::default()
    };
    let mut buf = Vec::new();
    build_to_writer(records, &cfg, &mut buf).map_err(|e| e.to_string())?;
    let samples = parse_samples(&buf);

    let (mut ksm, mut rm, mut spans) = (0usize, 0usize, 0usize);
    for s in &samples {
        let (m, k) = sizes[&s.record_id];
        let code: Vec<&str> = input_code(&s.input).unwrap().split_whitespace().collect();
        let sentinels = code.iter().filter(|t| noise.sentinel_index(t).is_some()).count();
        let masked = m - (code.len() - sentinels);
        match s.task {
            Task::Ksm => {
                ksm += 1;
                let want = mask_budget(noise.ksm_rate, k);
                ensure(masked == want, || format!("{} KSM masked {masked} of k={k}, want {want}", s.record_id))?;
            }
            Task::Rm => {
                rm += 1;
                let want = mask_budget(noise.rm_rate, m);
                ensure(masked == want, || format!("{} RM masked {masked} of M={m}, want {want}", s.record_id))?;
                spans += sentinels;
            }
            _ => return Err(format!("unexpected task {}", s.task)),
        }
    }
    ensure(ksm == 10_000 && rm == 10_000, || format!("{ksm} KSM and {rm} RM samples"))?;
    let mean = spans as f64 / rm as f64;
    ensure((2.4..=2.6).contains(&mean), || format!("mean RM span count {mean}"))?;
    Ok(format!("{ksm} KSM and {rm} RM budgets exact; mean span count {mean:.4}"))
}

fn target_invariance() -> Result<String, String> {
    let mut records = commits500();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..500 {
        let hunks = rng.random_range(1..=6);
        records.push(synthetic_record(&mut rng, &format!("syn{i}"), hunks));
    }
    let by_id: HashMap<String, CorpusRecord> = records.iter().map(|r| (r.id.clone(), r.clone())).collect();
    let mut buf = Vec::new();
    build_to_writer(records, &BuildConfig::default(), &mut buf).map_err(|e| e.to_string())?;
    let samples = parse_samples(&buf);
    let mut per_task: BTreeMap<String, usize> = BTreeMap::new();
    for s in &samples {
        let r = &by_id[&s.record_id];
        let profile = LanguageProfile::for_language(&r.lang);
        let new = canonical(&r.new, profile);
        ensure(s.target == new, || format!("{} {} target is not the new code", s.record_id, s.task))?;
        ensure(s.target != canonical(&r.old, profile), || format!("{} {} targets the old code", s.record_id, s.task))?;
        *per_task.entry(s.task.to_string()).or_default() += 1;
    }
    ensure(per_task.len() == 4, || format!("tasks present: {per_task:?}"))?;
    Ok(format!("{} samples {per_task:?} all target the new code", samples.len()))
}

fn worker_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture_path("commits500.jsonl");
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}.jsonl"));
        let (code, _, err) = run_cli(&[
            "build",
            "--in",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
            "--workers",
            workers,
        ]);
        ensure(code == 0, || format!("build --workers {workers} exited {code}: {err}"))?;
        let stats = std::fs::read(corpus::stats_path(&out)).unwrap();
        outputs.push((std::fs::read(&out).unwrap(), stats));
    }
    ensure(!outputs[0].0.is_empty(), || "empty corpus".into())?;
    ensure(outputs[0].0 == outputs[1].0, || "corpus files differ".into())?;
    ensure(outputs[0].1 == outputs[1].1, || "stats files differ".into())?;
    let lines = outputs[0].0.iter().filter(|&&b| b == b'\n').count();
    Ok(format!("{lines} samples byte-identical for 1 and 8 workers"))
}

fn dedup() -> Result<String, String> {
    let mut records: Vec<CorpusRecord> = (0..10)
        .map(|i| CorpusRecord {
            id: format!("r{i}"),
            old: format!("int f{i}() {{\n  return {i};\n}}\n"),
            new: format!("int f{i}() {{\n  return {};\n}}\n", i + 100),
            nl: None,
            lang: "java".into(),
        })
        .collect();
    records[5].old = "void f5() {\n  setup();\n  helperCall(alpha, beta);\n  return;\n}\n".into();
    records[7].new = "void f7() {\n  if (gamma > 0) {\n    delta();\n  }\n}\n".into();
    let planted = [
        records[2].new.clone(),
        "helperCall(alpha, beta);".to_string(),
        "if (gamma >  0) {\tdelta();   }".to_string(),
    ];
    let dir = tempfile::tempdir().unwrap();
    let test_set = dir.path().join("test.jsonl");
    let body: String = planted
        .iter()
        .map(|code| serde_json::json!({ "code": code }).to_string() + "\n")
        .collect();
    std::fs::write(&test_set, body).unwrap();

    let outcome = dedup_filter(records.clone(), std::slice::from_ref(&test_set)).map_err(|e| e.to_string())?;
    ensure(outcome.dropped == ["r2", "r5", "r7"], || format!("dropped {:?}", outcome.dropped))?;

    let cfg = BuildConfig {
        test_set_paths: vec![test_set],
        ..Default::default()
    };
    let stats = build_to_writer(records, &cfg, std::io::sink()).map_err(|e| e.to_string())?;
    ensure(stats.records_deduped == 3 && stats.records_kept == 7, || format!("{stats:?}"))?;
    Ok(format!("dropped {:?} (exact, substring, whitespace variant)", outcome.dropped))
}

fn metric_oracles() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let alphabet = rng.random_range(1..=6);
        let c = random_tokens(&mut rng, 10, alphabet).join(" ");
        let r = random_tokens(&mut rng, 10, alphabet).join(" ");
        let err = (bleu4(&c, &r) - bleu_oracle(&c, &r)).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("case {case}: bleu4({c:?}, {r:?}) off by {err}"))?;
    }
    for case in 0..100 {
        let s = random_tokens(&mut rng, 10, 6).join(" ");
        let r = random_tokens(&mut rng, 10, 6).join(" ");
        ensure(sari(&s, &s, &s).value == 1.0, || format!("case {case}: identity SARI below 1"))?;
        let v = sari(&s, &r, &r).value;
        ensure(v == 1.0, || format!("case {case}: perfect edit {s:?} -> {r:?} scored {v}"))?;
    }
    let java = LanguageProfile::java();
    let vocab = ["int", "x", "=", "y", "return", ";", "if", "(", ")", "z"];
    let w = CodeBleuWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
    for case in 0..100 {
        let pick = |rng: &mut ChaCha8Rng| -> String {
            let n = rng.random_range(0..=10);
            (0..n).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
        };
        let (c, r) = (pick(&mut rng), pick(&mut rng));
        let got = codebleu(&c, &r, java, w).value;
        ensure(got == bleu4(&c, &r) / 100.0, || format!("case {case}: codebleu {got} != bleu4/100"))?;
    }
    Ok(format!("BLEU max error {worst:.1e}; SARI exact 1.0 on 200 cases; CodeBLEU reduction exact on 100 pairs"))
}

fn amplification() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let records: Vec<CorpusRecord> = (0..100)
        .map(|i| {
            let hunks = if i % 2 == 0 { 1 } else { 3 };
            synthetic_record(&mut rng, &format!("amp{i}"), hunks)
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("amp.jsonl");
    corpus::build(records, &BuildConfig::default(), &out).map_err(|e| e.to_string())?;
    let stats = corpus::stats(&out).map_err(|e| e.to_string())?;
    ensure((stats.mean_hunks - 2.0).abs() < 1e-12, || format!("mean hunks {}", stats.mean_hunks))?;
    ensure((stats.amplification - 5.0).abs() <= 0.01, || format!("amplification {}", stats.amplification))?;
    Ok(format!(
        "mean hunks {:.2}, amplification {:.3} over {} records",
        stats.mean_hunks, stats.amplification, stats.records_kept
    ))
}
