use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{
    split_class_code, Corpus, SceneRecord, SymbolType, IGNORE_TRANSCRIPTION, PANEL_CLASSES,
};
use crate::geometry::QuadBox;

/// A broken invariant: which entity, which rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

fn push(out: &mut Vec<Violation>, entity: String, rule: &str) {
    out.push(Violation {
        entity,
        rule: rule.to_string(),
    });
}

fn check_box(out: &mut Vec<Violation>, entity: String, quad: &QuadBox, w: f64, h: f64) {
    if !quad.is_finite() {
        push(out, entity, "non-finite coordinate");
        return;
    }
    if quad
        .corners
        .iter()
        .any(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h)
    {
        push(out, entity.clone(), "box outside image");
    }
    if !quad.is_simple() {
        push(out, entity, "self-intersecting box");
    } else if quad.signed_area() <= 0.0 {
        push(out, entity, "box not clockwise or zero area");
    }
}

/// Lists every broken invariant of `scene`; empty means valid.
pub fn validate_scene(scene: &SceneRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let (w, h) = (scene.width as f64, scene.height as f64);
    if scene.width == 0 || scene.height == 0 {
        push(&mut out, "scene".into(), "image size must be positive");
    }
    for (i, s) in scene.symbols.iter().enumerate() {
        let entity = format!("symbols[{i}]");
        check_box(&mut out, entity.clone(), &s.quad, w, h);
        match split_class_code(&s.class_code) {
            None => push(&mut out, entity, "malformed class code"),
            Some((letter, _)) if SymbolType::from_letter(letter).is_none() => {
                push(&mut out, entity, "unknown symbol type letter")
            }
            Some(_) => {}
        }
    }
    for (i, t) in scene.texts.iter().enumerate() {
        let entity = format!("texts[{i}]");
        check_box(&mut out, entity.clone(), &t.quad, w, h);
        if t.ignored != (t.transcription == IGNORE_TRANSCRIPTION) {
            push(
                &mut out,
                entity.clone(),
                "ignored flag inconsistent with ###",
            );
        }
        if t.transcription.is_empty() {
            push(&mut out, entity, "empty transcription");
        }
    }
    let mut ids = HashSet::new();
    for (i, p) in scene.panels.iter().enumerate() {
        let entity = format!("panels[{i}]");
        check_box(&mut out, entity.clone(), &p.quad, w, h);
        if !PANEL_CLASSES.contains(&p.panel_class) {
            push(&mut out, entity.clone(), "panel_class out of range");
        }
        if !ids.insert(p.panel_id) {
            push(&mut out, entity, "duplicate panel_id");
        }
    }
    for (i, d) in scene.descriptions.iter().enumerate() {
        let entity = format!("descriptions[{i}]");
        if !ids.contains(&d.panel_id) {
            push(&mut out, entity.clone(), "dangling panel reference");
        }
        if d.text.trim().is_empty() {
            push(&mut out, entity, "empty description");
        }
    }
    for v in &mut out {
        v.entity = format!("{}/{}", scene.image_id, v.entity);
    }
    out
}

/// Scene-level checks plus vocabulary coverage. Empty vocabularies are
/// treated as "not loaded" and skip the coverage check.
pub fn validate_corpus(corpus: &Corpus) -> Vec<Violation> {
    let mut out: Vec<Violation> = corpus.scenes.iter().flat_map(validate_scene).collect();
    for scene in &corpus.scenes {
        if !corpus.symbol_vocab.is_empty() {
            for (i, s) in scene.symbols.iter().enumerate() {
                if !corpus.symbol_vocab.contains_key(&s.class_code) {
                    push(
                        &mut out,
                        format!("{}/symbols[{i}]", scene.image_id),
                        "class code missing from vocab",
                    );
                }
            }
        }
        if !corpus.panel_vocab.is_empty() {
            for (i, p) in scene.panels.iter().enumerate() {
                if !corpus.panel_vocab.contains_key(&p.panel_class) {
                    push(
                        &mut out,
                        format!("{}/panels[{i}]", scene.image_id),
                        "panel class missing from vocab",
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use crate::scene::{DescriptionAnnotation, PanelAnnotation, SymbolAnnotation, TextAnnotation};

    fn base() -> SceneRecord {
        let mut s = SceneRecord::new("s", 100, 50);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(10.0, 10.0, 60.0, 40.0),
            3,
            1,
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(12.0, 12.0, 20.0, 20.0),
            "a1",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(22.0, 12.0, 40.0, 20.0),
            "G70",
        ));
        s.descriptions.push(DescriptionAnnotation {
            panel_id: 1,
            text: "Go straight along G70".into(),
        });
        s
    }

    fn rules(s: &SceneRecord) -> Vec<String> {
        validate_scene(s).into_iter().map(|v| v.rule).collect()
    }

    #[test]
    fn valid_scene_has_no_violations() {
        assert!(validate_scene(&base()).is_empty());
    }

    #[test]
    fn box_outside_image() {
        let mut s = base();
        s.symbols[0].quad.corners[1] = Point2D::new(101.0, 0.0);
        assert!(rules(&s).contains(&"box outside image".to_string()));
    }

    #[test]
    fn dangling_reference() {
        let mut s = base();
        s.descriptions[0].panel_id = 9;
        assert_eq!(rules(&s), vec!["dangling panel reference"]);
    }

    #[test]
    fn unknown_letter() {
        let mut s = base();
        s.symbols[0].class_code = "x3".into();
        let v = validate_scene(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "unknown symbol type letter");
        assert_eq!(v[0].entity, "s/symbols[0]");
    }

    #[test]
    fn duplicate_ids_and_bad_class() {
        let mut s = base();
        let mut p = s.panels[0].clone();
        p.panel_class = 0;
        s.panels.push(p);
        let r = rules(&s);
        assert!(r.contains(&"duplicate panel_id".to_string()));
        assert!(r.contains(&"panel_class out of range".to_string()));
    }

    #[test]
    fn counter_clockwise_box() {
        let mut s = base();
        s.texts[0].quad.corners.reverse();
        assert_eq!(rules(&s), vec!["box not clockwise or zero area"]);
    }

    #[test]
    fn vocab_coverage() {
        let mut corpus = Corpus::new(vec![base()]);
        corpus.symbol_vocab.insert("a2".into(), "left".into());
        let v = validate_corpus(&corpus);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "class code missing from vocab");
    }
}
