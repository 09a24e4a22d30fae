//! Description grammar: frame maps, symbol tables and clause templates,
//! loaded from JSON.
//!
//! A template mixes literal text, `<slot>` placeholders and optional
//! `[...]` groups. A group is kept only when every slot inside it has a
//! filler; a slot outside any group is required.

use std::collections::BTreeMap;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const GRAMMAR_EN: &str = include_str!("../../data/grammar_en.json");
const GRAMMAR_ZH: &str = include_str!("../../data/grammar_zh.json");

/// Slots whose fillers are elided from a syntax frame.
pub const ENTITY_SLOTS: [&str; 4] = ["route", "dest", "quantity", "vehicle"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameType {
    Guidance,
    Prohibition,
    Warning,
    Notice,
    Scenic,
    Highway,
    Dynamic,
}

impl FrameType {
    pub const ALL: [FrameType; 7] = [
        FrameType::Guidance,
        FrameType::Prohibition,
        FrameType::Warning,
        FrameType::Notice,
        FrameType::Scenic,
        FrameType::Highway,
        FrameType::Dynamic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FrameType::Guidance => "guidance",
            FrameType::Prohibition => "prohibition",
            FrameType::Warning => "warning",
            FrameType::Notice => "notice",
            FrameType::Scenic => "scenic",
            FrameType::Highway => "highway",
            FrameType::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Clause shapes, one per kind of anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseKind {
    /// Arrow symbol with its routes and destinations.
    Action,
    /// Limit symbol with quantity and vehicle.
    Limit,
    /// Any other known symbol.
    Phrase,
    /// Routes with no arrow to attach to.
    Route,
    /// Destinations with no arrow to attach to.
    Dest,
}

impl ClauseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClauseKind::Action => "action",
            ClauseKind::Limit => "limit",
            ClauseKind::Phrase => "phrase",
            ClauseKind::Route => "route",
            ClauseKind::Dest => "dest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Lit(String),
    Slot(String),
    Group(Vec<Piece>),
}

/// Parsed clause template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    pieces: Vec<Piece>,
}

/// One stretch of rendered text; `slot` names the entity slot it fills.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub text: String,
    pub slot: Option<String>,
}

impl Template {
    pub fn parse(source: &str) -> Result<Template> {
        let err = |m: &str| Error::Grammar(format!("template `{source}`: {m}"));
        let mut top: Vec<Piece> = Vec::new();
        let mut group: Option<Vec<Piece>> = None;
        let mut lit = String::new();
        let mut chars = source.chars();
        let flush = |lit: &mut String, out: &mut Vec<Piece>| {
            if !lit.is_empty() {
                out.push(Piece::Lit(std::mem::take(lit)));
            }
        };
        while let Some(c) = chars.next() {
            match c {
                '<' => {
                    let name: String = chars.by_ref().take_while(|&c| c != '>').collect();
                    if name.is_empty() || !name.chars().all(|c| c.is_ascii_lowercase() || c == '_')
                    {
                        return Err(err("bad slot name"));
                    }
                    let out = group.as_mut().unwrap_or(&mut top);
                    flush(&mut lit, out);
                    out.push(Piece::Slot(name));
                }
                '[' => {
                    if group.is_some() {
                        return Err(err("nested optional group"));
                    }
                    flush(&mut lit, &mut top);
                    group = Some(Vec::new());
                }
                ']' => {
                    let mut g = group.take().ok_or_else(|| err("unbalanced `]`"))?;
                    flush(&mut lit, &mut g);
                    top.push(Piece::Group(g));
                }
                '>' => return Err(err("stray `>`")),
                c => lit.push(c),
            }
        }
        if group.is_some() {
            return Err(err("unclosed `[`"));
        }
        flush(&mut lit, &mut top);
        Ok(Template {
            source: source.to_string(),
            pieces: top,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Slot names in order of appearance.
    pub fn slots(&self) -> Vec<&str> {
        fn walk<'a>(ps: &'a [Piece], out: &mut Vec<&'a str>) {
            for p in ps {
                match p {
                    Piece::Slot(s) => out.push(s),
                    Piece::Group(g) => walk(g, out),
                    Piece::Lit(_) => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.pieces, &mut out);
        out
    }

    /// Fills the template. `fillers` maps slot name to its rendered list.
    pub fn render(
        &self,
        fillers: &BTreeMap<String, Vec<String>>,
        list_separator: &str,
    ) -> Result<Vec<Segment>> {
        let filled = |s: &str| fillers.get(s).is_some_and(|v| !v.is_empty());
        let mut out = Vec::new();
        let emit = |p: &Piece, out: &mut Vec<Segment>| -> Result<()> {
            match p {
                Piece::Lit(t) => out.push(Segment {
                    text: t.clone(),
                    slot: None,
                }),
                Piece::Slot(s) => {
                    if !filled(s) {
                        return Err(Error::Grammar(format!(
                            "template `{}` needs a filler for <{s}>",
                            self.source
                        )));
                    }
                    out.push(Segment {
                        text: fillers[s].join(list_separator),
                        slot: ENTITY_SLOTS.contains(&s.as_str()).then(|| s.clone()),
                    });
                }
                Piece::Group(_) => unreachable!("groups are not nested"),
            }
            Ok(())
        };
        for p in &self.pieces {
            match p {
                Piece::Group(g) => {
                    let complete = g.iter().all(|q| match q {
                        Piece::Slot(s) => filled(s),
                        _ => true,
                    });
                    if complete {
                        for q in g {
                            emit(q, &mut out)?;
                        }
                    }
                }
                p => emit(p, &mut out)?,
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitEntry {
    pub subject: String,
    pub unit: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FrameFile {
    fallback: String,
    #[serde(default)]
    clauses: BTreeMap<ClauseKind, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GrammarFile {
    schema_version: u32,
    language: String,
    panel_frames: BTreeMap<String, FrameType>,
    letter_frames: BTreeMap<String, FrameType>,
    route_pattern: String,
    number_pattern: String,
    actions: BTreeMap<String, String>,
    limits: BTreeMap<String, LimitEntry>,
    phrases: BTreeMap<String, String>,
    vehicles: Vec<String>,
    quantity_format: String,
    list_separator: String,
    clause_separator: String,
    clauses: BTreeMap<ClauseKind, String>,
    frames: BTreeMap<FrameType, FrameFile>,
}

#[derive(Debug, Clone)]
struct FrameTemplates {
    fallback: String,
    clauses: BTreeMap<ClauseKind, Template>,
}

/// Loaded, validated grammar.
#[derive(Debug, Clone)]
pub struct Grammar {
    file: GrammarFile,
    route_re: Regex,
    number_re: Regex,
    quantity: Template,
    defaults: BTreeMap<ClauseKind, Template>,
    frames: BTreeMap<FrameType, FrameTemplates>,
}

fn anchored(pattern: &str) -> Result<Regex> {
    Regex::new(&format!("^(?:{pattern})$"))
        .map_err(|e| Error::Grammar(format!("pattern `{pattern}`: {e}")))
}

impl Grammar {
    pub fn from_json(text: &str) -> Result<Grammar> {
        let file: GrammarFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Grammar(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let parse_all =
            |m: &BTreeMap<ClauseKind, String>| -> Result<BTreeMap<ClauseKind, Template>> {
                m.iter()
                    .map(|(k, v)| Ok((*k, Template::parse(v)?)))
                    .collect()
            };
        let defaults = parse_all(&file.clauses)?;
        let frames = file
            .frames
            .iter()
            .map(|(k, f)| {
                Ok((
                    *k,
                    FrameTemplates {
                        fallback: f.fallback.clone(),
                        clauses: parse_all(&f.clauses)?,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Grammar {
            route_re: anchored(&file.route_pattern)?,
            number_re: anchored(&file.number_pattern)?,
            quantity: Template::parse(&file.quantity_format)?,
            defaults,
            frames,
            file,
        })
    }

    pub fn english() -> Grammar {
        Grammar::from_json(GRAMMAR_EN).expect("bundled English grammar")
    }

    pub fn chinese() -> Grammar {
        Grammar::from_json(GRAMMAR_ZH).expect("bundled Chinese grammar")
    }

    /// Bundled grammar by language tag (`en`, `zh`).
    pub fn bundled(language: &str) -> Result<Grammar> {
        match language {
            "en" => Ok(Grammar::english()),
            "zh" => Ok(Grammar::chinese()),
            other => Err(Error::Config(format!(
                "no bundled grammar for language `{other}`"
            ))),
        }
    }

    pub fn bundled_json(language: &str) -> Option<&'static str> {
        match language {
            "en" => Some(GRAMMAR_EN),
            "zh" => Some(GRAMMAR_ZH),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("grammar serializes")
    }

    pub fn language(&self) -> &str {
        &self.file.language
    }

    pub fn frame_for_panel(&self, panel_class: u8) -> Option<FrameType> {
        self.file
            .panel_frames
            .get(&panel_class.to_string())
            .copied()
    }

    pub fn frame_for_letter(&self, letter: char) -> Option<FrameType> {
        self.file
            .letter_frames
            .get(letter.to_string().as_str())
            .copied()
    }

    pub fn action(&self, code: &str) -> Option<&str> {
        self.file.actions.get(code).map(String::as_str)
    }

    pub fn limit(&self, code: &str) -> Option<&LimitEntry> {
        self.file.limits.get(code)
    }

    pub fn phrase(&self, code: &str) -> Option<&str> {
        self.file.phrases.get(code).map(String::as_str)
    }

    pub fn actions(&self) -> &BTreeMap<String, String> {
        &self.file.actions
    }

    pub fn limits(&self) -> &BTreeMap<String, LimitEntry> {
        &self.file.limits
    }

    pub fn phrases(&self) -> &BTreeMap<String, String> {
        &self.file.phrases
    }

    pub fn vehicles(&self) -> &[String] {
        &self.file.vehicles
    }

    pub fn is_vehicle(&self, text: &str) -> bool {
        self.file.vehicles.iter().any(|v| v == text)
    }

    pub fn is_route(&self, text: &str) -> bool {
        self.route_re.is_match(text)
    }

    pub fn is_number(&self, text: &str) -> bool {
        self.number_re.is_match(text)
    }

    pub fn route_pattern(&self) -> &str {
        &self.file.route_pattern
    }

    pub fn list_separator(&self) -> &str {
        &self.file.list_separator
    }

    pub fn clause_separator(&self) -> &str {
        &self.file.clause_separator
    }

    /// Every known class code with a display name.
    pub fn symbol_names(&self) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> = self.file.actions.clone();
        m.extend(self.file.phrases.clone());
        for (code, l) in &self.file.limits {
            m.insert(code.clone(), l.subject.clone());
        }
        m
    }

    /// Renders a number with the unit of a limit symbol.
    pub fn quantity(&self, number: &str, unit: &str) -> Result<String> {
        let fillers = BTreeMap::from([
            ("number".to_string(), vec![number.to_string()]),
            ("unit".to_string(), vec![unit.to_string()]),
        ]);
        Ok(self
            .quantity
            .render(&fillers, "")?
            .into_iter()
            .map(|s| s.text)
            .collect())
    }

    pub fn template(&self, frame: FrameType, kind: ClauseKind) -> Result<&Template> {
        let f = self
            .frames
            .get(&frame)
            .ok_or_else(|| Error::MissingTemplate(frame.to_string()))?;
        f.clauses
            .get(&kind)
            .or_else(|| self.defaults.get(&kind))
            .ok_or_else(|| Error::MissingTemplate(format!("{frame}.{}", kind.as_str())))
    }

    pub fn fallback(&self, frame: FrameType) -> Result<&str> {
        self.frames
            .get(&frame)
            .map(|f| f.fallback.as_str())
            .ok_or_else(|| Error::MissingTemplate(frame.to_string()))
    }

    /// Drops the templates of one frame type; used to exercise the
    /// missing-template path.
    pub fn without_frame(mut self, frame: FrameType) -> Grammar {
        self.frames.remove(&frame);
        self.file.frames.remove(&frame);
        self
    }
}
