//! Syntax frames: descriptions with their slot fillers elided.

use std::collections::BTreeMap;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{tokenize, TokenizerMode};
use crate::error::{Error, Result};

/// Longest token span tried when matching a slot.
pub const MAX_SLOT_SPAN: usize = 12;

const LIST_SEPARATORS: [&str; 3] = [",", "，", "、"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegexSlot {
    pub pattern: String,
    pub slot: String,
}

#[derive(Serialize, Deserialize)]
struct SlotRulesFile {
    #[serde(default)]
    regex_slots: Vec<RegexSlot>,
    #[serde(default)]
    lexicon: BTreeMap<String, String>,
}

/// Patterns and entity names whose matches become slot markers.
#[derive(Debug, Clone)]
pub struct SlotRules {
    regex_slots: Vec<RegexSlot>,
    compiled: Vec<Regex>,
    lexicon: BTreeMap<String, String>,
}

impl PartialEq for SlotRules {
    fn eq(&self, other: &Self) -> bool {
        self.regex_slots == other.regex_slots && self.lexicon == other.lexicon
    }
}

impl SlotRules {
    /// Patterns must match a whole token span; lexicon keys are compared
    /// after NFC normalization.
    pub fn new(
        regex_slots: Vec<RegexSlot>,
        lexicon: BTreeMap<String, String>,
    ) -> Result<SlotRules> {
        let compiled = regex_slots
            .iter()
            .map(|r| {
                Regex::new(&format!("^(?:{})$", r.pattern))
                    .map_err(|e| Error::Config(format!("slot pattern `{}`: {e}", r.pattern)))
            })
            .collect::<Result<_>>()?;
        let lexicon = lexicon
            .into_iter()
            .map(|(k, v)| (k.nfc().collect(), v))
            .collect();
        Ok(SlotRules {
            regex_slots,
            compiled,
            lexicon,
        })
    }

    pub fn from_json(text: &str) -> Result<SlotRules> {
        let f: SlotRulesFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        SlotRules::new(f.regex_slots, f.lexicon)
    }

    pub fn to_json(&self) -> String {
        let f = SlotRulesFile {
            regex_slots: self.regex_slots.clone(),
            lexicon: self.lexicon.clone(),
        };
        serde_json::to_string_pretty(&f).expect("slot rules serialize")
    }

    pub fn regex_slots(&self) -> &[RegexSlot] {
        &self.regex_slots
    }

    pub fn lexicon(&self) -> &BTreeMap<String, String> {
        &self.lexicon
    }

    pub fn add_entity(&mut self, entity: &str, slot: &str) {
        self.lexicon
            .insert(entity.nfc().collect(), slot.to_string());
    }

    /// Slot assigned to a span of text: lexicon first, then the patterns in
    /// file order.
    pub fn classify(&self, span: &str) -> Option<&str> {
        let key: String = span.nfc().collect();
        if let Some(slot) = self.lexicon.get(&key) {
            return Some(slot);
        }
        self.compiled
            .iter()
            .zip(&self.regex_slots)
            .find(|(re, _)| re.is_match(&key))
            .map(|(_, r)| r.slot.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum FrameToken {
    Word(String),
    Slot(String),
}

impl fmt::Display for FrameToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameToken::Word(w) => f.write_str(w),
            FrameToken::Slot(s) => write!(f, "SLOT:{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SyntaxFrame {
    pub skeleton: Vec<FrameToken>,
}

impl SyntaxFrame {
    /// Skeleton rendered as strings, slots as `SLOT:<name>`.
    pub fn labels(&self) -> Vec<String> {
        self.skeleton.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for SyntaxFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join(" "))
    }
}

/// Replaces every longest slot-matching token span with its marker, then
/// folds comma-separated runs of one slot into a single marker.
pub fn extract_frame(
    description: &str,
    rules: &SlotRules,
    mode: TokenizerMode,
) -> Result<SyntaxFrame> {
    let seq = tokenize(description, mode);
    let joiner = seq.mode.joiner();
    let tokens = &seq.tokens;
    let mut raw = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=MAX_SLOT_SPAN.min(tokens.len() - i))
            .rev()
            .find_map(|len| {
                rules
                    .classify(&tokens[i..i + len].join(joiner))
                    .map(|slot| (len, slot.to_string()))
            });
        match longest {
            Some((len, slot)) => {
                raw.push(FrameToken::Slot(slot));
                i += len;
            }
            None => {
                raw.push(FrameToken::Word(tokens[i].clone()));
                i += 1;
            }
        }
    }
    let skeleton = collapse_slot_lists(raw);
    if !skeleton.iter().any(|t| matches!(t, FrameToken::Word(_))) {
        return Err(Error::FramelessDescription(description.to_string()));
    }
    Ok(SyntaxFrame { skeleton })
}

/// Folds `SLOT:x , SLOT:x` runs into one `SLOT:x`.
pub fn collapse_slot_lists(raw: Vec<FrameToken>) -> Vec<FrameToken> {
    let mut skeleton: Vec<FrameToken> = Vec::with_capacity(raw.len());
    let mut k = 0;
    while k < raw.len() {
        if let (Some(FrameToken::Slot(prev)), FrameToken::Word(sep), Some(FrameToken::Slot(next))) =
            (skeleton.last(), &raw[k], raw.get(k + 1))
        {
            if LIST_SEPARATORS.contains(&sep.as_str()) && prev == next {
                k += 2;
                continue;
            }
        }
        skeleton.push(raw[k].clone());
        k += 1;
    }
    skeleton
}

/// 1 when both descriptions share a frame; a frameless side scores 0.
pub fn frame_match(
    candidate: &str,
    reference: &str,
    rules: &SlotRules,
    mode: TokenizerMode,
) -> bool {
    match (
        extract_frame(candidate, rules, mode),
        extract_frame(reference, rules, mode),
    ) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Fraction of pairs whose frames agree.
pub fn soft_accuracy(
    candidates: &[String],
    references: &[String],
    rules: &SlotRules,
    mode: TokenizerMode,
) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if candidates.is_empty() {
        return Ok(1.0);
    }
    let hits = candidates
        .iter()
        .zip(references)
        .filter(|(c, r)| frame_match(c, r, rules, mode))
        .count();
    Ok(hits as f64 / candidates.len() as f64)
}
