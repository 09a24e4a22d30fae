//! Subcommand bodies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tsi_core::eval::{
    align_scenes, evaluate_detection, evaluate_recognition, DetectionReport, RecognitionReport,
};
use tsi_core::interp::{
    evaluate_interpretation, interpret_corpus, reference_records, DescriptionRecord, Grammar,
    InterpretationEval,
};
use tsi_core::metrics::SlotRules;
use tsi_core::scene::{parse_corpus, serialize_corpus, split_corpus, Corpus, SceneRecord};
use tsi_core::synth::{
    generate_corpus, perturb_corpus, Generator, NoiseProfile, NoiseVocab, Vocab,
};
use tsi_core::Exec;

use crate::provenance::{sha256_hex, Provenance};
use crate::settings::{ensure_dir, read_text, write_text, CliError, CliResult, Settings};

/// Test share of the benchmark split: 666 of 2,682 images.
pub const DEFAULT_TEST_FRACTION: f64 = 666.0 / 2682.0;

pub struct GenArgs {
    pub scenes: Option<usize>,
    pub language: Option<String>,
    pub grammar: Option<PathBuf>,
    pub out: PathBuf,
}

pub struct SplitArgs {
    pub input: PathBuf,
    pub test_fraction: f64,
    pub tolerance: f64,
    pub out: PathBuf,
}

pub struct PerturbArgs {
    pub input: PathBuf,
    pub noise: Option<String>,
    pub language: Option<String>,
    pub grammar: Option<PathBuf>,
    pub out: PathBuf,
}

pub struct InterpretArgs {
    pub input: PathBuf,
    pub language: Option<String>,
    pub grammar: Option<PathBuf>,
    pub out: PathBuf,
    pub diagnostics: Option<PathBuf>,
}

pub struct EvalArgs {
    pub gt: PathBuf,
    pub pred: PathBuf,
    pub language: Option<String>,
    pub grammar: Option<PathBuf>,
    pub slot_rules: Option<PathBuf>,
    /// Interpretation input for `report`; interpreted from `pred` if absent.
    pub descriptions: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: bool,
}

fn read_scenes(path: &Path, exec: Exec) -> CliResult<Vec<SceneRecord>> {
    parse_corpus(&read_text(path)?, exec).map_err(|e| CliError::at(path, e))
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn grammar_hash(g: &Grammar) -> String {
    sha256_hex(g.to_json().as_bytes())
}

/// True when the first record of a JSON Lines file is a description
/// rather than a scene.
fn is_description_file(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| serde_json::from_str::<Value>(l).ok())
        .is_some_and(|v| v.get("text").is_some() && v.get("width").is_none())
}

fn parse_descriptions(path: &Path, text: &str) -> CliResult<Vec<DescriptionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                CliError::Usage(format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    i + 1,
                    e.column()
                ))
            })
        })
        .collect()
}

/// Writes the JSON report when asked and prints text or JSON.
fn emit(report: &Value, text: String, out: Option<&Path>, json_stdout: bool) -> CliResult<()> {
    let body = pretty(report);
    if let Some(p) = out {
        write_text(p, &body)?;
    }
    if json_stdout {
        print!("{body}");
    } else {
        print!("{text}");
    }
    Ok(())
}

pub fn gen(s: &Settings, a: &GenArgs) -> CliResult<()> {
    let mut cfg = s.file.generator.clone().unwrap_or_default();
    cfg.seed = s.require_seed("gen")?;
    if let Some(n) = a.scenes {
        cfg.n_scenes = n;
    }
    if let Some(l) = a.language.as_deref().or(s.file.language.as_deref()) {
        cfg.language = l.to_string();
    }
    let grammar = s.grammar(a.grammar.as_deref(), &cfg.language)?;
    let settings = json!({ "generator": cfg, "grammar": grammar_hash(&grammar) });
    let generator = Generator::with_grammar(cfg.clone(), grammar)?;
    let exec = s.exec()?;
    let out = generate_corpus(&generator, exec)?;
    log::info!("generated {} scenes", out.corpus.len());

    ensure_dir(&a.out)?;
    let scenes = &out.corpus.scenes;
    write_text(&a.out.join("corpus.jsonl"), &serialize_corpus(scenes, exec))?;
    write_text(
        &a.out.join("symbol_vocab.json"),
        &pretty(&out.corpus.symbol_vocab),
    )?;
    write_text(
        &a.out.join("panel_vocab.json"),
        &pretty(&out.corpus.panel_vocab),
    )?;
    write_text(
        &a.out.join("slot_rules.json"),
        &format!("{}\n", out.slot_rules.to_json()),
    )?;
    write_text(&a.out.join("oracle.jsonl"), &jsonl(&out.oracles))?;
    write_text(
        &a.out.join("descriptions.jsonl"),
        &jsonl(&reference_records(scenes)),
    )?;
    let provenance = Provenance::new("gen", &settings, Some(cfg.seed), s.stamp);
    let manifest = json!({
        "provenance": provenance,
        "generator": cfg,
        "vocab": generator.vocab(),
        "scenes": scenes.len(),
    });
    write_text(&a.out.join("manifest.json"), &pretty(&manifest))?;
    Ok(())
}

pub fn split(s: &Settings, a: &SplitArgs) -> CliResult<()> {
    let seed = s.require_seed("split")?;
    let exec = s.exec()?;
    let scenes = read_scenes(&a.input, exec)?;
    let outcome = split_corpus(&Corpus::new(scenes), a.test_fraction, seed, a.tolerance)?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    ensure_dir(&a.out)?;
    write_text(
        &a.out.join("train.jsonl"),
        &serialize_corpus(&outcome.train.scenes, exec),
    )?;
    write_text(
        &a.out.join("test.jsonl"),
        &serialize_corpus(&outcome.test.scenes, exec),
    )?;
    let settings =
        json!({ "test_fraction": a.test_fraction, "tolerance": a.tolerance, "seed": seed });
    let provenance = Provenance::new("split", &settings, Some(seed), s.stamp).input(&a.input)?;
    let gaps: serde_json::Map<String, Value> = outcome
        .gaps
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    let summary = json!({
        "provenance": provenance,
        "train": outcome.train.len(),
        "test": outcome.test.len(),
        "gaps": gaps,
        "warnings": outcome.warnings,
    });
    write_text(&a.out.join("split.json"), &pretty(&summary))?;
    Ok(())
}

fn resolve_noise(s: &Settings, flag: Option<&str>) -> CliResult<NoiseProfile> {
    let profile = match flag {
        Some(name) => match NoiseProfile::preset(name) {
            Some(p) => p,
            None => {
                let path = Path::new(name);
                serde_json::from_str(&read_text(path)?).map_err(|e| {
                    CliError::Usage(format!(
                        "{name}: line {}, column {}: {e}",
                        e.line(),
                        e.column()
                    ))
                })?
            }
        },
        None => s.file.noise.unwrap_or_else(NoiseProfile::light),
    };
    profile.validate()?;
    Ok(profile)
}

pub fn perturb(s: &Settings, a: &PerturbArgs) -> CliResult<()> {
    let seed = s.require_seed("perturb")?;
    let profile = resolve_noise(s, a.noise.as_deref())?;
    let language = s.language(a.language.as_deref()).to_string();
    let grammar = s.grammar(a.grammar.as_deref(), &language)?;
    let exec = s.exec()?;
    let scenes = read_scenes(&a.input, exec)?;
    let vocab = NoiseVocab::from_grammar(&grammar, &Vocab::bundled(&grammar).destinations);
    let (pred, logs) = perturb_corpus(&scenes, &profile, &vocab, seed, exec)?;
    ensure_dir(&a.out)?;
    write_text(
        &a.out.join("predictions.jsonl"),
        &serialize_corpus(&pred, exec),
    )?;
    write_text(&a.out.join("perturbation_log.jsonl"), &jsonl(&logs))?;
    let settings = json!({ "noise": profile, "grammar": grammar_hash(&grammar), "seed": seed });
    let provenance = Provenance::new("perturb", &settings, Some(seed), s.stamp).input(&a.input)?;
    let edited = logs.iter().filter(|l| !l.is_clean()).count();
    let manifest = json!({ "provenance": provenance, "noise": profile, "scenes": pred.len(), "edited_scenes": edited });
    write_text(&a.out.join("manifest.json"), &pretty(&manifest))?;
    Ok(())
}

pub fn interpret(s: &Settings, a: &InterpretArgs) -> CliResult<()> {
    let language = s.language(a.language.as_deref()).to_string();
    let grammar = s.grammar(a.grammar.as_deref(), &language)?;
    let exec = s.exec()?;
    let scenes = read_scenes(&a.input, exec)?;
    let results = interpret_corpus(&scenes, &grammar, exec);
    let records: Vec<DescriptionRecord> = results.iter().flat_map(|r| r.records()).collect();
    let diagnostics: Vec<_> = results
        .iter()
        .flat_map(|r| r.diagnostics.iter().cloned())
        .collect();
    for d in &diagnostics {
        log::debug!("{}: cluster {}: {}", d.image_id, d.cluster, d.message);
    }
    write_text(&a.out, &jsonl(&records))?;
    let sidecar = a.diagnostics.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".diagnostics.jsonl");
        PathBuf::from(p)
    });
    write_text(&sidecar, &jsonl(&diagnostics))?;
    if !diagnostics.is_empty() {
        log::warn!(
            "{} clusters left undescribed; see {}",
            diagnostics.len(),
            sidecar.display()
        );
    }
    if !results.is_empty() && results.iter().all(|r| r.failed()) {
        return Err(CliError::Failed("no scene could be interpreted".into()));
    }
    Ok(())
}

struct Loaded {
    gt: Vec<SceneRecord>,
    pred: Vec<SceneRecord>,
    exec: Exec,
}

fn load_pair(s: &Settings, a: &EvalArgs) -> CliResult<Loaded> {
    let exec = s.exec()?;
    let gt = read_scenes(&a.gt, exec)?;
    let pred = read_scenes(&a.pred, exec)?;
    Ok(Loaded { gt, pred, exec })
}

fn eval_settings(s: &Settings) -> Value {
    json!({ "eval": s.eval })
}

pub fn eval_det(s: &Settings, a: &EvalArgs) -> CliResult<()> {
    let l = load_pair(s, a)?;
    let report = evaluate_detection(&l.gt, &l.pred, &s.eval, l.exec)?;
    let provenance = Provenance::new("eval-det", &eval_settings(s), None, s.stamp)
        .input(&a.gt)?
        .input(&a.pred)?;
    let text = format!(
        "{}config {}\n",
        report.render_text(),
        provenance.config_hash
    );
    emit(
        &json!({ "provenance": provenance, "detection": report }),
        text,
        a.out.as_deref(),
        a.json,
    )
}

pub fn eval_rec(s: &Settings, a: &EvalArgs) -> CliResult<()> {
    let l = load_pair(s, a)?;
    let report = evaluate_recognition(&l.gt, &l.pred, &s.eval, l.exec)?;
    let provenance = Provenance::new("eval-rec", &eval_settings(s), None, s.stamp)
        .input(&a.gt)?
        .input(&a.pred)?;
    let text = format!(
        "{}config {}\n",
        report.render_text(),
        provenance.config_hash
    );
    emit(
        &json!({ "provenance": provenance, "recognition": report }),
        text,
        a.out.as_deref(),
        a.json,
    )
}

fn interpretation_json(e: &InterpretationEval) -> Value {
    let r = e.scores.report();
    json!({
        "pairs": e.pairs,
        "missing": e.missing,
        "unmatched": e.unmatched,
        "R1": r.r1,
        "R2": r.r2,
        "Rl": r.rl,
        "B4": r.b4,
        "SA": r.sa,
    })
}

fn interpretation_text(e: &InterpretationEval) -> String {
    let mut t = e.scores.report().render_text();
    let _ = writeln!(
        t,
        "pairs {} missing {} unmatched {}",
        e.pairs, e.missing, e.unmatched
    );
    t
}

/// Candidate descriptions: a descriptions file as is, or a scene corpus
/// run through the interpreter.
fn candidates(
    path: &Path,
    gt: &[SceneRecord],
    grammar: &Grammar,
    exec: Exec,
) -> CliResult<Vec<DescriptionRecord>> {
    let text = read_text(path)?;
    if is_description_file(&text) {
        return parse_descriptions(path, &text);
    }
    let scenes = parse_corpus(&text, exec).map_err(|e| CliError::at(path, e))?;
    align_scenes(gt, &scenes)?;
    Ok(interpret_corpus(&scenes, grammar, exec)
        .iter()
        .flat_map(|r| r.records())
        .collect())
}

struct InterpSetup {
    grammar: Grammar,
    rules: SlotRules,
    settings: Value,
}

fn interp_setup(s: &Settings, a: &EvalArgs) -> CliResult<InterpSetup> {
    let language = s.language(a.language.as_deref()).to_string();
    let grammar = s.grammar(a.grammar.as_deref(), &language)?;
    let rules = s.slot_rules(a.slot_rules.as_deref(), &grammar)?;
    let settings = json!({
        "eval": s.eval,
        "tokenizer": s.tokenizer,
        "grammar": grammar_hash(&grammar),
        "slot_rules": sha256_hex(rules.to_json().as_bytes()),
    });
    Ok(InterpSetup {
        grammar,
        rules,
        settings,
    })
}

pub fn eval_interp(s: &Settings, a: &EvalArgs) -> CliResult<()> {
    let setup = interp_setup(s, a)?;
    let exec = s.exec()?;
    let gt = read_scenes(&a.gt, exec)?;
    let cands = candidates(&a.pred, &gt, &setup.grammar, exec)?;
    let e = evaluate_interpretation(&gt, &cands, &setup.rules, s.tokenizer, exec)?;
    let provenance = Provenance::new("eval-interp", &setup.settings, None, s.stamp)
        .input(&a.gt)?
        .input(&a.pred)?;
    let text = format!(
        "{}config {}\n",
        interpretation_text(&e),
        provenance.config_hash
    );
    emit(
        &json!({ "provenance": provenance, "interpretation": interpretation_json(&e) }),
        text,
        a.out.as_deref(),
        a.json,
    )
}

/// Detection, recognition and interpretation of one prediction file.
pub fn report(s: &Settings, a: &EvalArgs) -> CliResult<()> {
    let setup = interp_setup(s, a)?;
    let l = load_pair(s, a)?;
    let det: DetectionReport = evaluate_detection(&l.gt, &l.pred, &s.eval, l.exec)?;
    let rec: RecognitionReport = evaluate_recognition(&l.gt, &l.pred, &s.eval, l.exec)?;
    let cands = match &a.descriptions {
        Some(p) => {
            let text = read_text(p)?;
            parse_descriptions(p, &text)?
        }
        None => interpret_corpus(&l.pred, &setup.grammar, l.exec)
            .iter()
            .flat_map(|r| r.records())
            .collect(),
    };
    let interp = evaluate_interpretation(&l.gt, &cands, &setup.rules, s.tokenizer, l.exec)?;
    let mut provenance = Provenance::new("report", &setup.settings, None, s.stamp)
        .input(&a.gt)?
        .input(&a.pred)?;
    if let Some(p) = &a.descriptions {
        provenance = provenance.input(p)?;
    }
    let text = format!(
        "detection\n{}\nrecognition\n{}\ninterpretation\n{}\nconfig {}\n",
        det.render_text(),
        rec.render_text(),
        interpretation_text(&interp),
        provenance.config_hash
    );
    let body = json!({
        "provenance": provenance,
        "detection": det,
        "recognition": rec,
        "interpretation": interpretation_json(&interp),
    });
    emit(&body, text, a.out.as_deref(), a.json)
}
