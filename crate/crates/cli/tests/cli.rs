use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tsi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsi-kit"))
        .current_dir(dir)
        .env_remove("TSI_KIT_CONFIG")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = tsi(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

fn gen(dir: &Path, scenes: &str, out: &str) {
    ok(dir, &["--seed", "7", "gen", "--scenes", scenes, "-o", out]);
}

#[test]
fn gen_writes_reproducible_corpora() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "100", "a");
    gen(d.path(), "100", "b");
    assert_eq!(read(d.path(), "a/corpus.jsonl").lines().count(), 100);
    for f in [
        "corpus.jsonl",
        "oracle.jsonl",
        "descriptions.jsonl",
        "slot_rules.json",
        "manifest.json",
    ] {
        assert_eq!(
            read(d.path(), &format!("a/{f}")),
            read(d.path(), &format!("b/{f}")),
            "{f}"
        );
    }
}

#[test]
fn empty_corpus_is_fine() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "0", "e");
    assert_eq!(read(d.path(), "e/corpus.jsonl"), "");
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    // No seed: usage error.
    assert_eq!(code(&tsi(p, &["gen", "--scenes", "3", "-o", "x"])), 2);
    // Unknown flag and bad tokenizer.
    assert_eq!(code(&tsi(p, &["gen", "--bogus"])), 2);
    assert_eq!(
        code(&tsi(p, &["--tokenizer", "words", "eval-det", "a", "b"])),
        2
    );
    // Missing file.
    assert_eq!(code(&tsi(p, &["eval-det", "nope.jsonl", "nope.jsonl"])), 3);
    // Malformed config.
    std::fs::write(p.join("bad.json"), "{\"seed\": 1, \"colour\": 2}").unwrap();
    assert_eq!(
        code(&tsi(p, &["--config", "bad.json", "gen", "-o", "x"])),
        2
    );
    // Malformed corpus line.
    std::fs::write(p.join("broken.jsonl"), "{\"image_id\": 1\n").unwrap();
    assert_eq!(
        code(&tsi(p, &["eval-det", "broken.jsonl", "broken.jsonl"])),
        2
    );
    // Different image sets.
    gen(p, "4", "g");
    ok(p, &["--seed", "8", "gen", "--scenes", "3", "-o", "h"]);
    assert_eq!(
        code(&tsi(p, &["eval-det", "g/corpus.jsonl", "h/corpus.jsonl"])),
        4
    );
}

#[test]
fn config_file_supplies_the_seed() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(
        p.join("cfg.json"),
        "{\"seed\": 7, \"generator\": {\"n_scenes\": 5}}",
    )
    .unwrap();
    ok(p, &["--config", "cfg.json", "gen", "-o", "c"]);
    gen(p, "5", "f");
    assert_eq!(read(p, "c/corpus.jsonl"), read(p, "f/corpus.jsonl"));
}

#[test]
fn self_evaluation_is_perfect() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    gen(p, "30", "g");
    let det = json(&ok(
        p,
        &["eval-det", "g/corpus.jsonl", "g/corpus.jsonl", "--json"],
    ));
    for k in det["detection"]["kinds"].as_array().unwrap() {
        assert_eq!(k["prf"]["f_measure"], 1.0);
    }
    let text =
        String::from_utf8(ok(p, &["eval-det", "g/corpus.jsonl", "g/corpus.jsonl"]).stdout).unwrap();
    assert!(text.contains("100.00"));
    let interp = json(&ok(
        p,
        &[
            "eval-interp",
            "g/corpus.jsonl",
            "g/descriptions.jsonl",
            "--json",
        ],
    ));
    assert_eq!(interp["interpretation"]["R1"], 100.0);
    assert_eq!(interp["interpretation"]["SA"], 100.0);
}

/// Same optimum as an exhaustive search over one-to-one assignments.
#[test]
fn hand_built_detection_counts() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| {
        format!("[[{x0},{y0}],[{x1},{y0}],[{x1},{y1}],[{x0},{y1}]]")
    };
    let sym = |b: String| format!("{{\"box\":{b},\"class_code\":\"a1\"}}");
    let gt_boxes = [
        rect(0.0, 0.0, 100.0, 100.0),
        rect(200.0, 0.0, 300.0, 100.0),
        rect(400.0, 0.0, 500.0, 100.0),
    ];
    let pred_boxes = [
        rect(10.0, 0.0, 110.0, 100.0),
        rect(0.0, 30.0, 100.0, 130.0),
        rect(260.0, 0.0, 360.0, 100.0),
    ];
    let line = |boxes: &[String]| {
        format!(
            "{{\"image_id\":\"h\",\"width\":600,\"height\":200,\"symbols\":[{}],\"texts\":[],\"panels\":[]}}\n",
            boxes.iter().cloned().map(sym).collect::<Vec<_>>().join(",")
        )
    };
    std::fs::write(p.join("gt.jsonl"), line(&gt_boxes)).unwrap();
    std::fs::write(p.join("pred.jsonl"), line(&pred_boxes)).unwrap();
    // IoUs: pred0–gt0 0.818, pred1–gt0 0.538, pred2–gt1 0.25. Optimal TP = 1.
    let det = json(&ok(p, &["eval-det", "gt.jsonl", "pred.jsonl", "--json"]));
    let k = &det["detection"]["kinds"][0];
    assert_eq!(k["kind"], "symbol");
    assert_eq!(
        (k["tp"].as_u64(), k["fp"].as_u64(), k["fn"].as_u64()),
        (Some(1), Some(2), Some(2))
    );
}

#[test]
fn interpret_reproduces_reference_descriptions() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    gen(p, "60", "g");
    ok(p, &["interpret", "g/corpus.jsonl", "-o", "out.jsonl"]);
    assert_eq!(read(p, "out.jsonl"), read(p, "g/descriptions.jsonl"));
    assert_eq!(read(p, "out.jsonl.diagnostics.jsonl"), "");
}

#[test]
fn orphan_warning_sign() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(
        p.join("o.jsonl"),
        "{\"image_id\":\"o\",\"width\":100,\"height\":100,\"symbols\":[{\"box\":[[10,10],[40,10],[40,40],[10,40]],\"class_code\":\"w3\"}],\"texts\":[],\"panels\":[]}\n",
    )
    .unwrap();
    ok(p, &["interpret", "o.jsonl", "-o", "o.out.jsonl"]);
    let lines: Vec<Value> = read(p, "o.out.jsonl")
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["panel_id"], Value::Null);
    assert!(!lines[0]["text"].as_str().unwrap().is_empty());
}

#[test]
fn perturbation_log_explains_every_changed_description() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    gen(p, "80", "g");
    ok(
        p,
        &[
            "--seed",
            "3",
            "perturb",
            "g/corpus.jsonl",
            "--noise",
            "light",
            "-o",
            "n",
        ],
    );
    ok(p, &["interpret", "n/predictions.jsonl", "-o", "n.jsonl"]);
    let edited: BTreeSet<String> = read(p, "n/perturbation_log.jsonl")
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| !v["edits"].as_array().unwrap().is_empty())
        .map(|v| v["image_id"].as_str().unwrap().to_string())
        .collect();
    assert!(!edited.is_empty());
    let by_image = |file: &str| -> std::collections::BTreeMap<String, Vec<String>> {
        let mut m = std::collections::BTreeMap::<String, Vec<String>>::new();
        for l in read(p, file).lines() {
            let v: Value = serde_json::from_str(l).unwrap();
            m.entry(v["image_id"].as_str().unwrap().into())
                .or_default()
                .push(l.to_string());
        }
        m
    };
    let (clean, noisy) = (by_image("g/descriptions.jsonl"), by_image("n.jsonl"));
    let mut changed = 0;
    for id in clean.keys().chain(noisy.keys()) {
        if clean.get(id) != noisy.get(id) {
            assert!(edited.contains(id), "{id} changed without a logged edit");
            changed += 1;
        }
    }
    assert!(changed > 0);
}

#[test]
fn report_covers_all_three_evaluations() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    gen(p, "20", "g");
    ok(
        p,
        &[
            "--seed",
            "1",
            "perturb",
            "g/corpus.jsonl",
            "--noise",
            "heavy",
            "-o",
            "n",
        ],
    );
    let r = json(&ok(
        p,
        &["report", "g/corpus.jsonl", "n/predictions.jsonl", "--json"],
    ));
    for key in ["detection", "recognition", "interpretation", "provenance"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert!(r["interpretation"]["SA"].as_f64().unwrap() < 100.0);
}
