//! Scene annotations: symbols, texts and guide panels with their
//! per-panel natural-language descriptions.
//!
//! Symbols are named by a type letter and a serial number (`w10`, `a2`).
//! Texts carry their transcription; illegible ones are transcribed as
//! `###` and flagged as ignored. Panels carry a class in `1..=7`.

mod io;
mod split;
mod stats;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use crate::geometry::{Point2D, QuadBox};
pub use io::{
    parse_corpus, parse_scene, parse_scene_with_warnings, read_corpus_file, read_vocab_file,
    serialize_corpus, serialize_scene, write_corpus_file, ParsedScene,
};
pub use split::{split_corpus, SplitOutcome, DEFAULT_SPLIT_TOLERANCE};
pub use stats::{corpus_stats, CategoryHistogram, KindStats};
pub use validate::{validate_corpus, validate_scene, Violation};

/// Transcription marking an illegible text.
pub const IGNORE_TRANSCRIPTION: &str = "###";

pub const PANEL_CLASSES: std::ops::RangeInclusive<u8> = 1..=7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignKind {
    Symbol,
    Text,
    Panel,
}

impl SignKind {
    pub const ALL: [SignKind; 3] = [SignKind::Symbol, SignKind::Text, SignKind::Panel];

    pub fn as_str(&self) -> &'static str {
        match self {
            SignKind::Symbol => "symbol",
            SignKind::Text => "text",
            SignKind::Panel => "panel",
        }
    }
}

/// Symbol type encoded by the first letter of a class code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolType {
    Warning,
    Instruction,
    Prohibition,
    Arrow,
}

impl SymbolType {
    pub fn from_letter(c: char) -> Option<SymbolType> {
        match c {
            'w' => Some(SymbolType::Warning),
            'i' => Some(SymbolType::Instruction),
            'p' => Some(SymbolType::Prohibition),
            'a' => Some(SymbolType::Arrow),
            _ => None,
        }
    }

    pub fn letter(&self) -> char {
        match self {
            SymbolType::Warning => 'w',
            SymbolType::Instruction => 'i',
            SymbolType::Prohibition => 'p',
            SymbolType::Arrow => 'a',
        }
    }
}

/// Splits a class code into its letter and serial number. Accepts any
/// lowercase ASCII letter; membership in `{w,i,p,a}` is a validation rule.
pub fn split_class_code(code: &str) -> Option<(char, u32)> {
    let mut chars = code.chars();
    let letter = chars.next().filter(char::is_ascii_lowercase)?;
    let digits = chars.as_str();
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n = digits.parse::<u32>().ok()?;
    Some((letter, n))
}

pub fn symbol_type(code: &str) -> Option<SymbolType> {
    split_class_code(code).and_then(|(c, _)| SymbolType::from_letter(c))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolAnnotation {
    pub quad: QuadBox,
    pub class_code: String,
    pub ignored: bool,
    /// Confidence, present on predictions only.
    pub score: Option<f64>,
}

impl SymbolAnnotation {
    pub fn new(quad: QuadBox, class_code: impl Into<String>) -> Self {
        SymbolAnnotation {
            quad,
            class_code: class_code.into(),
            ignored: false,
            score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextAnnotation {
    pub quad: QuadBox,
    pub transcription: String,
    pub ignored: bool,
    pub score: Option<f64>,
}

impl TextAnnotation {
    /// The ignore flag follows the transcription.
    pub fn new(quad: QuadBox, transcription: impl Into<String>) -> Self {
        let transcription = transcription.into();
        TextAnnotation {
            quad,
            ignored: transcription == IGNORE_TRANSCRIPTION,
            transcription,
            score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelAnnotation {
    pub quad: QuadBox,
    pub panel_class: u8,
    pub panel_id: u32,
    pub score: Option<f64>,
}

impl PanelAnnotation {
    pub fn new(quad: QuadBox, panel_class: u8, panel_id: u32) -> Self {
        PanelAnnotation {
            quad,
            panel_class,
            panel_id,
            score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionAnnotation {
    pub panel_id: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub symbols: Vec<SymbolAnnotation>,
    pub texts: Vec<TextAnnotation>,
    pub panels: Vec<PanelAnnotation>,
    pub descriptions: Vec<DescriptionAnnotation>,
}

impl SceneRecord {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        SceneRecord {
            image_id: image_id.into(),
            width,
            height,
            ..Default::default()
        }
    }

    pub fn sign_count(&self) -> usize {
        self.symbols.len() + self.texts.len() + self.panels.len()
    }

    pub fn panel(&self, panel_id: u32) -> Option<&PanelAnnotation> {
        self.panels.iter().find(|p| p.panel_id == panel_id)
    }

    /// Applies `f` to every corner of every box.
    pub fn map_points(&self, f: impl Fn(&Point2D) -> Point2D) -> SceneRecord {
        let mut s = self.clone();
        for sym in &mut s.symbols {
            sym.quad = sym.quad.map(&f);
        }
        for t in &mut s.texts {
            t.quad = t.quad.map(&f);
        }
        for p in &mut s.panels {
            p.quad = p.quad.map(&f);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub scenes: Vec<SceneRecord>,
    pub symbol_vocab: BTreeMap<String, String>,
    pub panel_vocab: BTreeMap<u8, String>,
}

impl Corpus {
    pub fn new(scenes: Vec<SceneRecord>) -> Self {
        Corpus {
            scenes,
            symbol_vocab: BTreeMap::new(),
            panel_vocab: BTreeMap::new(),
        }
    }

    pub fn with_vocab(
        scenes: Vec<SceneRecord>,
        symbol_vocab: BTreeMap<String, String>,
        panel_vocab: BTreeMap<u8, String>,
    ) -> Self {
        Corpus {
            scenes,
            symbol_vocab,
            panel_vocab,
        }
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}

/// English display names for the seven panel classes.
pub fn default_panel_vocab() -> BTreeMap<u8, String> {
    [
        "prohibit",
        "warning",
        "normal road instruction",
        "highway instruction",
        "scenic area instruction",
        "notice",
        "dynamic prompt",
    ]
    .iter()
    .enumerate()
    .map(|(i, name)| (i as u8 + 1, name.to_string()))
    .collect()
}
