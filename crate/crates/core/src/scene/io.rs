//! Canonical JSON Lines encoding of scene records.
//!
//! Keys are written in a fixed order and every coordinate or score is
//! rendered with exactly six decimals, so re-serializing a parsed record
//! reproduces its bytes. Non-ASCII text is written as raw UTF-8.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{
    split_class_code, DescriptionAnnotation, PanelAnnotation, SceneRecord, SymbolAnnotation,
    TextAnnotation, IGNORE_TRANSCRIPTION, PANEL_CLASSES,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{Point2D, QuadBox};

const SCENE_KEYS: &[&str] = &[
    "image_id",
    "width",
    "height",
    "symbols",
    "texts",
    "panels",
    "descriptions",
];
const SYMBOL_KEYS: &[&str] = &["box", "class_code", "ignored", "score"];
const TEXT_KEYS: &[&str] = &["box", "transcription", "ignored", "score"];
const PANEL_KEYS: &[&str] = &["box", "panel_class", "panel_id", "score"];
const DESCRIPTION_KEYS: &[&str] = &["panel_id", "text"];

#[derive(Deserialize)]
struct RawScene {
    image_id: String,
    width: u32,
    height: u32,
    #[serde(default)]
    symbols: Vec<RawSymbol>,
    #[serde(default)]
    texts: Vec<RawText>,
    #[serde(default)]
    panels: Vec<RawPanel>,
    #[serde(default)]
    descriptions: Vec<DescriptionAnnotation>,
}

#[derive(Deserialize)]
struct RawSymbol {
    #[serde(rename = "box")]
    quad: QuadBox,
    class_code: String,
    #[serde(default)]
    ignored: bool,
    score: Option<f64>,
}

#[derive(Deserialize)]
struct RawText {
    #[serde(rename = "box")]
    quad: QuadBox,
    transcription: String,
    ignored: Option<bool>,
    score: Option<f64>,
}

#[derive(Deserialize)]
struct RawPanel {
    #[serde(rename = "box")]
    quad: QuadBox,
    panel_class: i64,
    panel_id: u32,
    score: Option<f64>,
}

/// A parsed record plus the unknown keys that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScene {
    pub scene: SceneRecord,
    pub warnings: Vec<String>,
}

/// Parses one corpus line. Unknown keys are logged and skipped.
pub fn parse_scene(bytes: &[u8]) -> Result<SceneRecord> {
    let parsed = parse_scene_with_warnings(bytes, 1)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    Ok(parsed.scene)
}

/// Parses one record; `line` only feeds error positions and warnings.
pub fn parse_scene_with_warnings(bytes: &[u8], line: usize) -> Result<ParsedScene> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: line + e.line().saturating_sub(1),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut warnings = Vec::new();
    collect_unknown(&value, line, &mut warnings);
    let raw: RawScene = serde_json::from_value(value).map_err(|e| Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    })?;
    Ok(ParsedScene {
        scene: check_schema(raw)?,
        warnings,
    })
}

fn collect_unknown(value: &Value, line: usize, out: &mut Vec<String>) {
    let Some(obj) = value.as_object() else {
        return;
    };
    unknown_keys(obj, SCENE_KEYS, "scene", line, out);
    for (list, keys) in [
        ("symbols", SYMBOL_KEYS),
        ("texts", TEXT_KEYS),
        ("panels", PANEL_KEYS),
        ("descriptions", DESCRIPTION_KEYS),
    ] {
        if let Some(items) = obj.get(list).and_then(Value::as_array) {
            for (i, item) in items.iter().enumerate() {
                if let Some(o) = item.as_object() {
                    unknown_keys(o, keys, &format!("{list}[{i}]"), line, out);
                }
            }
        }
    }
}

fn unknown_keys(
    obj: &Map<String, Value>,
    known: &[&str],
    path: &str,
    line: usize,
    out: &mut Vec<String>,
) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            out.push(format!(
                "line {line}: ignoring unknown field `{path}.{key}`"
            ));
        }
    }
}

fn invalid(field: String, message: &str) -> Error {
    Error::Validation {
        field,
        message: message.to_string(),
    }
}

fn check_quad(quad: &QuadBox, field: String) -> Result<()> {
    if quad.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "non-finite coordinate"))
    }
}

fn check_score(score: Option<f64>, field: String) -> Result<()> {
    match score {
        Some(s) if !(0.0..=1.0).contains(&s) => Err(invalid(field, "score outside [0,1]")),
        _ => Ok(()),
    }
}

fn check_schema(raw: RawScene) -> Result<SceneRecord> {
    let mut scene = SceneRecord::new(raw.image_id, raw.width, raw.height);
    for (i, s) in raw.symbols.into_iter().enumerate() {
        check_quad(&s.quad, format!("symbols[{i}].box"))?;
        check_score(s.score, format!("symbols[{i}].score"))?;
        if split_class_code(&s.class_code).is_none() {
            return Err(invalid(
                format!("symbols[{i}].class_code"),
                "class_code must be a letter followed by a positive integer",
            ));
        }
        scene.symbols.push(SymbolAnnotation {
            quad: s.quad,
            class_code: s.class_code,
            ignored: s.ignored,
            score: s.score,
        });
    }
    for (i, t) in raw.texts.into_iter().enumerate() {
        check_quad(&t.quad, format!("texts[{i}].box"))?;
        check_score(t.score, format!("texts[{i}].score"))?;
        let expected = t.transcription == IGNORE_TRANSCRIPTION;
        if t.ignored.is_some_and(|flag| flag != expected) {
            return Err(invalid(
                format!("texts[{i}].ignored"),
                "ignored must be true exactly when the transcription is ###",
            ));
        }
        scene.texts.push(TextAnnotation {
            quad: t.quad,
            transcription: t.transcription,
            ignored: expected,
            score: t.score,
        });
    }
    for (i, p) in raw.panels.into_iter().enumerate() {
        check_quad(&p.quad, format!("panels[{i}].box"))?;
        check_score(p.score, format!("panels[{i}].score"))?;
        let class = u8::try_from(p.panel_class)
            .ok()
            .filter(|c| PANEL_CLASSES.contains(c))
            .ok_or_else(|| {
                invalid(
                    format!("panels[{i}].panel_class"),
                    "panel_class out of range",
                )
            })?;
        scene.panels.push(PanelAnnotation {
            quad: p.quad,
            panel_class: class,
            panel_id: p.panel_id,
            score: p.score,
        });
    }
    scene.descriptions = raw.descriptions;
    Ok(scene)
}

/// Parses a whole JSON Lines corpus; blank lines are skipped and errors
/// carry the 1-based file line. Output order follows the file.
pub fn parse_corpus(text: &str, exec: Exec) -> Result<Vec<SceneRecord>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let parsed = exec.map(&lines, |(n, l)| parse_scene_with_warnings(l.as_bytes(), *n));
    let mut scenes = Vec::with_capacity(parsed.len());
    for p in parsed {
        let p = p?;
        for w in &p.warnings {
            log::warn!("{w}");
        }
        scenes.push(p.scene);
    }
    Ok(scenes)
}

pub fn read_corpus_file(path: &Path, exec: Exec) -> Result<Vec<SceneRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text, exec)
}

/// Reads a `class_code → display name` JSON object.
pub fn read_vocab_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn push_str(out: &mut String, s: &str) {
    // serde_json's string escaping keeps non-ASCII characters verbatim.
    out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
}

fn push_num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.6}");
}

fn push_quad(out: &mut String, q: &QuadBox) {
    out.push('[');
    for (i, p) in q.corners.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_point(out, p);
    }
    out.push(']');
}

fn push_point(out: &mut String, p: &Point2D) {
    out.push('[');
    push_num(out, p.x);
    out.push(',');
    push_num(out, p.y);
    out.push(']');
}

fn push_score(out: &mut String, score: Option<f64>) {
    if let Some(s) = score {
        out.push_str(",\"score\":");
        push_num(out, s);
    }
}

fn push_list<T>(out: &mut String, key: &str, items: &[T], f: impl Fn(&mut String, &T)) {
    let _ = write!(out, ",\"{key}\":[");
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        f(out, item);
    }
    out.push(']');
}

/// One canonical line, without the trailing newline.
pub fn serialize_scene(scene: &SceneRecord) -> String {
    let mut out = String::with_capacity(256 + 160 * scene.sign_count());
    out.push_str("{\"image_id\":");
    push_str(&mut out, &scene.image_id);
    let _ = write!(
        out,
        ",\"width\":{},\"height\":{}",
        scene.width, scene.height
    );
    push_list(&mut out, "symbols", &scene.symbols, |o, s| {
        o.push_str("{\"box\":");
        push_quad(o, &s.quad);
        o.push_str(",\"class_code\":");
        push_str(o, &s.class_code);
        let _ = write!(o, ",\"ignored\":{}", s.ignored);
        push_score(o, s.score);
        o.push('}');
    });
    push_list(&mut out, "texts", &scene.texts, |o, t| {
        o.push_str("{\"box\":");
        push_quad(o, &t.quad);
        o.push_str(",\"transcription\":");
        push_str(o, &t.transcription);
        let _ = write!(o, ",\"ignored\":{}", t.ignored);
        push_score(o, t.score);
        o.push('}');
    });
    push_list(&mut out, "panels", &scene.panels, |o, p| {
        o.push_str("{\"box\":");
        push_quad(o, &p.quad);
        let _ = write!(
            o,
            ",\"panel_class\":{},\"panel_id\":{}",
            p.panel_class, p.panel_id
        );
        push_score(o, p.score);
        o.push('}');
    });
    push_list(&mut out, "descriptions", &scene.descriptions, |o, d| {
        let _ = write!(o, "{{\"panel_id\":{},\"text\":", d.panel_id);
        push_str(o, &d.text);
        o.push('}');
    });
    out.push('}');
    out
}

/// Newline-terminated lines in scene order.
pub fn serialize_corpus(scenes: &[SceneRecord], exec: Exec) -> String {
    let lines = exec.map(scenes, serialize_scene);
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

pub fn write_corpus_file(path: &Path, scenes: &[SceneRecord], exec: Exec) -> Result<()> {
    std::fs::write(path, serialize_corpus(scenes, exec))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_record() {
        let s = parse_scene(br#"{"image_id":"a","width":10,"height":20}"#).unwrap();
        assert_eq!(s.image_id, "a");
        assert!(s.symbols.is_empty() && s.texts.is_empty() && s.panels.is_empty());
    }

    #[test]
    fn hash_text_is_ignored() {
        let line = r####"{"image_id":"x","width":100,"height":100,
            "panels":[{"box":[[0,0],[50,0],[50,50],[0,50]],"panel_class":3,"panel_id":0}],
            "texts":[{"box":[[1,1],[9,1],[9,9],[1,9]],"transcription":"###"}]}"####;
        let s = parse_scene(line.as_bytes()).unwrap();
        assert!(s.texts[0].ignored);
    }

    #[test]
    fn panel_class_out_of_range() {
        let line = r#"{"image_id":"x","width":100,"height":100,
            "panels":[{"box":[[0,0],[50,0],[50,50],[0,50]],"panel_class":8,"panel_id":0}]}"#;
        match parse_scene(line.as_bytes()) {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "panels[0].panel_class");
                assert_eq!(message, "panel_class out of range");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_ignore_flag() {
        let line = r#"{"image_id":"x","width":100,"height":100,
            "texts":[{"box":[[1,1],[9,1],[9,9],[1,9]],"transcription":"G70","ignored":true}]}"#;
        assert!(matches!(
            parse_scene(line.as_bytes()),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn malformed_syntax_reports_position() {
        let err = parse_corpus(
            "{\"image_id\":\"a\",\"width\":1,\"height\":1}\n{oops\n",
            Exec::Sequential,
        )
        .unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_warn() {
        let p = parse_scene_with_warnings(
            br#"{"image_id":"a","width":1,"height":1,"camera":"x","symbols":[{"box":[[0,0],[1,0],[1,1],[0,1]],"class_code":"a1","color":"red"}]}"#,
            3,
        )
        .unwrap();
        assert_eq!(p.warnings.len(), 2);
        assert!(p.warnings[0].contains("scene.camera"));
        assert!(p.warnings[1].contains("symbols[0].color"));
    }

    #[test]
    fn empty_scene_canonical_line() {
        let s = SceneRecord::new("img_0001", 3840, 2160);
        assert_eq!(
            serialize_scene(&s),
            r#"{"image_id":"img_0001","width":3840,"height":2160,"symbols":[],"texts":[],"panels":[],"descriptions":[]}"#
        );
    }

    #[test]
    fn unicode_round_trip() {
        let mut s = SceneRecord::new("场景", 100, 100);
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(1.0, 1.0, 20.5, 10.25),
            "西安 \"北\"\\站",
        ));
        let line = serialize_scene(&s);
        assert!(line.contains("西安"));
        let back = parse_scene(line.as_bytes()).unwrap();
        assert_eq!(back, s);
        assert_eq!(serialize_scene(&back), line);
    }

    #[test]
    fn panel_order_preserved() {
        let mut s = SceneRecord::new("p", 100, 100);
        for id in [7, 2, 5] {
            s.panels.push(PanelAnnotation::new(
                QuadBox::rect(0.0, 0.0, 5.0, 5.0),
                3,
                id,
            ));
        }
        let back = parse_scene(serialize_scene(&s).as_bytes()).unwrap();
        let ids: Vec<u32> = back.panels.iter().map(|p| p.panel_id).collect();
        assert_eq!(ids, vec![7, 2, 5]);
    }

    #[test]
    fn six_decimals() {
        let mut s = SceneRecord::new("d", 10, 10);
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(0.5, 0.0, 1.0, 2.0),
            "a1",
        ));
        assert!(serialize_scene(&s).contains("[[0.500000,0.000000],[1.000000,0.000000]"));
    }
}
