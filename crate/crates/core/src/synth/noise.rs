//! Seeded detector and recognizer errors.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{Point2D, QuadBox};
use crate::interp::{Grammar, SignRef};
use crate::metrics::is_ideograph;
use crate::scene::{
    PanelAnnotation, SceneRecord, SignKind, SymbolAnnotation, TextAnnotation, PANEL_CLASSES,
};
use crate::seed;

const JITTER_RETRIES: usize = 10;
const SPURIOUS_RETRIES: usize = 20;

/// Error rates applied by [`perturb_predictions`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseProfile {
    /// Chance each annotated sign is missed.
    pub drop_rate: f64,
    /// Expected number of spurious boxes per scene.
    pub spurious_rate: f64,
    /// Standard deviation of per-corner noise, in pixels.
    pub jitter_sigma: f64,
    /// Chance a symbol or panel label flips to another class.
    pub class_confusion_rate: f64,
    /// Per-character substitution chance in texts.
    pub char_sub_rate: f64,
}

impl NoiseProfile {
    pub fn zero() -> NoiseProfile {
        NoiseProfile::default()
    }

    pub fn light() -> NoiseProfile {
        NoiseProfile {
            drop_rate: 0.05,
            spurious_rate: 0.3,
            jitter_sigma: 1.5,
            class_confusion_rate: 0.03,
            char_sub_rate: 0.01,
        }
    }

    pub fn heavy() -> NoiseProfile {
        NoiseProfile {
            drop_rate: 0.2,
            spurious_rate: 2.0,
            jitter_sigma: 6.0,
            class_confusion_rate: 0.15,
            char_sub_rate: 0.08,
        }
    }

    /// `zero`, `light` or `heavy`.
    pub fn preset(name: &str) -> Option<NoiseProfile> {
        match name {
            "zero" => Some(NoiseProfile::zero()),
            "light" => Some(NoiseProfile::light()),
            "heavy" => Some(NoiseProfile::heavy()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("drop_rate", self.drop_rate),
            ("class_confusion_rate", self.class_confusion_rate),
            ("char_sub_rate", self.char_sub_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, v) in [
            ("spurious_rate", self.spurious_rate),
            ("jitter_sigma", self.jitter_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Every rate at most the other's.
    pub fn dominated_by(&self, other: &NoiseProfile) -> bool {
        self.drop_rate <= other.drop_rate
            && self.spurious_rate <= other.spurious_rate
            && self.jitter_sigma <= other.jitter_sigma
            && self.class_confusion_rate <= other.class_confusion_rate
            && self.char_sub_rate <= other.char_sub_rate
    }
}

/// One applied edit. Ground-truth signs are named by their index in the
/// annotation lists; spurious ones by their index in the predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    Drop {
        sign: SignRef,
    },
    Jitter {
        sign: SignRef,
    },
    Relabel {
        sign: SignRef,
        from: String,
        to: String,
    },
    CharSub {
        sign: SignRef,
        position: usize,
        from: char,
        to: char,
    },
    Spurious {
        sign: SignRef,
        label: String,
    },
}

/// Edits applied to one scene, in application order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationLog {
    pub image_id: String,
    pub seed: u64,
    pub edits: Vec<Edit>,
}

impl PerturbationLog {
    pub fn is_clean(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&Edit) -> bool) -> usize {
        self.edits.iter().filter(|e| pred(e)).count()
    }
}

/// A kept or invented sign, tagged with its ground-truth index.
struct Tagged<T> {
    origin: usize,
    sign: T,
}

fn keep<T: Clone>(
    items: &[T],
    kind: SignKind,
    rate: f64,
    rng: &mut ChaCha8Rng,
    edits: &mut Vec<Edit>,
) -> Vec<Tagged<T>> {
    let mut out = Vec::with_capacity(items.len());
    for (index, s) in items.iter().enumerate() {
        if rate > 0.0 && rng.random_bool(rate) {
            edits.push(Edit::Drop {
                sign: SignRef { kind, index },
            });
        } else {
            out.push(Tagged {
                origin: index,
                sign: s.clone(),
            });
        }
    }
    out
}

/// Adds Gaussian noise to each corner and clamps to the image; a draw that
/// folds or flips the box is retried, then abandoned.
fn jitter(
    quad: &QuadBox,
    normal: &Normal<f64>,
    w: f64,
    h: f64,
    rng: &mut ChaCha8Rng,
) -> Option<QuadBox> {
    for _ in 0..JITTER_RETRIES {
        let mut corners = quad.corners;
        for p in &mut corners {
            *p = Point2D::new(
                (p.x + normal.sample(rng)).clamp(0.0, w),
                (p.y + normal.sample(rng)).clamp(0.0, h),
            );
        }
        let q = QuadBox::new(corners).quantized();
        if q.is_simple() && q.signed_area() > 0.0 {
            return Some(q);
        }
    }
    None
}

fn substitute(c: char, cjk_pool: &[char], rng: &mut ChaCha8Rng) -> Option<char> {
    let pool: Vec<char> = if c.is_ascii_digit() {
        ('0'..='9').collect()
    } else if c.is_ascii_lowercase() {
        ('a'..='z').collect()
    } else if c.is_ascii_uppercase() {
        ('A'..='Z').collect()
    } else if is_ideograph(c) {
        cjk_pool.to_vec()
    } else {
        return None;
    };
    let others: Vec<char> = pool.into_iter().filter(|&o| o != c).collect();
    others.choose(rng).copied()
}

/// Label pools for confusion and spurious boxes.
#[derive(Debug, Clone)]
pub struct NoiseVocab {
    pub symbol_classes: Vec<String>,
    pub texts: Vec<String>,
    pub ideographs: Vec<char>,
}

impl NoiseVocab {
    /// Symbol classes of `grammar`; `extra_texts` and the grammar's
    /// vehicles serve as text labels.
    pub fn from_grammar(grammar: &Grammar, extra_texts: &[String]) -> NoiseVocab {
        let symbol_classes: Vec<String> = grammar.symbol_names().into_keys().collect();
        let mut texts: Vec<String> = extra_texts.to_vec();
        texts.extend(grammar.vehicles().iter().cloned());
        texts.sort();
        texts.dedup();
        let mut ideographs: Vec<char> = grammar
            .symbol_names()
            .values()
            .chain(&texts)
            .flat_map(|s| s.chars())
            .filter(|&c| is_ideograph(c))
            .collect();
        ideographs.sort_unstable();
        ideographs.dedup();
        if ideographs.is_empty() {
            ideographs = "西安咸阳宝鸡北京上海".chars().collect();
        }
        NoiseVocab {
            symbol_classes,
            texts,
            ideographs,
        }
    }
}

/// Degrades a ground-truth scene into predictions: drop, jitter, confuse,
/// substitute characters, then insert spurious boxes, all from `seed`.
/// Descriptions are not part of predictions and are cleared. Kept signs
/// keep `score: None`; spurious ones get a low score.
pub fn perturb_predictions(
    scene: &SceneRecord,
    profile: &NoiseProfile,
    vocab: &NoiseVocab,
    seed: u64,
) -> (SceneRecord, PerturbationLog) {
    let mut rng = seed::rng(seed);
    let mut edits = Vec::new();
    let (w, h) = (scene.width as f64, scene.height as f64);

    let mut symbols = keep(
        &scene.symbols,
        SignKind::Symbol,
        profile.drop_rate,
        &mut rng,
        &mut edits,
    );
    let mut texts = keep(
        &scene.texts,
        SignKind::Text,
        profile.drop_rate,
        &mut rng,
        &mut edits,
    );
    let mut panels = keep(
        &scene.panels,
        SignKind::Panel,
        profile.drop_rate,
        &mut rng,
        &mut edits,
    );

    if profile.jitter_sigma > 0.0 {
        let normal = Normal::new(0.0, profile.jitter_sigma).expect("sigma checked");
        let mut apply =
            |kind: SignKind, origin: usize, quad: &mut QuadBox, rng: &mut ChaCha8Rng| {
                if let Some(q) = jitter(quad, &normal, w, h, rng) {
                    *quad = q;
                    edits.push(Edit::Jitter {
                        sign: SignRef {
                            kind,
                            index: origin,
                        },
                    });
                }
            };
        for t in &mut symbols {
            apply(SignKind::Symbol, t.origin, &mut t.sign.quad, &mut rng);
        }
        for t in &mut texts {
            apply(SignKind::Text, t.origin, &mut t.sign.quad, &mut rng);
        }
        for t in &mut panels {
            apply(SignKind::Panel, t.origin, &mut t.sign.quad, &mut rng);
        }
    }

    if profile.class_confusion_rate > 0.0 {
        for t in &mut symbols {
            if rng.random_bool(profile.class_confusion_rate) {
                let others: Vec<&String> = vocab
                    .symbol_classes
                    .iter()
                    .filter(|c| **c != t.sign.class_code)
                    .collect();
                if let Some(&to) = others.choose(&mut rng) {
                    edits.push(Edit::Relabel {
                        sign: SignRef {
                            kind: SignKind::Symbol,
                            index: t.origin,
                        },
                        from: t.sign.class_code.clone(),
                        to: to.clone(),
                    });
                    t.sign.class_code = to.clone();
                }
            }
        }
        for t in &mut panels {
            if rng.random_bool(profile.class_confusion_rate) {
                let others: Vec<u8> = PANEL_CLASSES.filter(|&c| c != t.sign.panel_class).collect();
                let to = *others.choose(&mut rng).expect("seven classes");
                edits.push(Edit::Relabel {
                    sign: SignRef {
                        kind: SignKind::Panel,
                        index: t.origin,
                    },
                    from: t.sign.panel_class.to_string(),
                    to: to.to_string(),
                });
                t.sign.panel_class = to;
            }
        }
    }

    if profile.char_sub_rate > 0.0 {
        for t in texts.iter_mut().filter(|t| !t.sign.ignored) {
            let mut chars: Vec<char> = t.sign.transcription.chars().collect();
            for (position, c) in chars.iter_mut().enumerate() {
                if !rng.random_bool(profile.char_sub_rate) {
                    continue;
                }
                if let Some(to) = substitute(*c, &vocab.ideographs, &mut rng) {
                    edits.push(Edit::CharSub {
                        sign: SignRef {
                            kind: SignKind::Text,
                            index: t.origin,
                        },
                        position,
                        from: *c,
                        to,
                    });
                    *c = to;
                }
            }
            t.sign.transcription = chars.into_iter().collect();
        }
    }

    let mut out = SceneRecord::new(scene.image_id.clone(), scene.width, scene.height);
    out.symbols = symbols.into_iter().map(|t| t.sign).collect();
    out.texts = texts.into_iter().map(|t| t.sign).collect();
    out.panels = panels.into_iter().map(|t| t.sign).collect();

    if profile.spurious_rate > 0.0 {
        let n = Poisson::new(profile.spurious_rate)
            .expect("rate checked")
            .sample(&mut rng) as usize;
        let sizes: Vec<(f64, f64)> = scene
            .symbols
            .iter()
            .map(|s| s.quad)
            .chain(scene.texts.iter().map(|t| t.quad))
            .chain(scene.panels.iter().map(|p| p.quad))
            .map(|q| {
                let b = q.bounds();
                (b.width(), b.height())
            })
            .collect();
        let occupied: Vec<_> = occupied_bounds(scene);
        let mut next_panel = scene.panels.iter().map(|p| p.panel_id).max().unwrap_or(0) + 1;
        for _ in 0..n {
            let (bw, bh) = sizes.choose(&mut rng).copied().unwrap_or((100.0, 60.0));
            let (bw, bh) = (bw.clamp(1.0, w), bh.clamp(1.0, h));
            let mut corner = (0.0, 0.0);
            for _ in 0..SPURIOUS_RETRIES {
                corner = (
                    rng.random_range(0.0..=w - bw).floor(),
                    rng.random_range(0.0..=h - bh).floor(),
                );
                let b = QuadBox::rect(corner.0, corner.1, corner.0 + bw, corner.1 + bh).bounds();
                if !occupied.iter().any(|o| o.intersects(&b)) {
                    break;
                }
            }
            let quad = QuadBox::rect(corner.0, corner.1, corner.0 + bw, corner.1 + bh).quantized();
            let score = Some((rng.random_range(0.05..0.5) * 1e6f64).round() / 1e6);
            let (sign, label) = match rng.random_range(0..3u8) {
                0 => {
                    let code = vocab
                        .symbol_classes
                        .choose(&mut rng)
                        .cloned()
                        .unwrap_or_else(|| "w1".into());
                    let mut s = SymbolAnnotation::new(quad, code.clone());
                    s.score = score;
                    out.symbols.push(s);
                    (
                        SignRef {
                            kind: SignKind::Symbol,
                            index: out.symbols.len() - 1,
                        },
                        code,
                    )
                }
                1 => {
                    let text = vocab
                        .texts
                        .choose(&mut rng)
                        .cloned()
                        .unwrap_or_else(|| "0".into());
                    let mut t = TextAnnotation::new(quad, text.clone());
                    t.score = score;
                    out.texts.push(t);
                    (
                        SignRef {
                            kind: SignKind::Text,
                            index: out.texts.len() - 1,
                        },
                        text,
                    )
                }
                _ => {
                    let class = rng.random_range(PANEL_CLASSES);
                    let mut p = PanelAnnotation::new(quad, class, next_panel);
                    next_panel += 1;
                    p.score = score;
                    out.panels.push(p);
                    (
                        SignRef {
                            kind: SignKind::Panel,
                            index: out.panels.len() - 1,
                        },
                        class.to_string(),
                    )
                }
            };
            edits.push(Edit::Spurious { sign, label });
        }
    }

    (
        out,
        PerturbationLog {
            image_id: scene.image_id.clone(),
            seed,
            edits,
        },
    )
}

fn occupied_bounds(scene: &SceneRecord) -> Vec<crate::geometry::Bounds> {
    scene
        .symbols
        .iter()
        .map(|s| s.quad.bounds())
        .chain(scene.texts.iter().map(|t| t.quad.bounds()))
        .chain(scene.panels.iter().map(|p| p.quad.bounds()))
        .collect()
}

/// Perturbs every scene with seed `mix(seed, i)`.
pub fn perturb_corpus(
    scenes: &[SceneRecord],
    profile: &NoiseProfile,
    vocab: &NoiseVocab,
    seed: u64,
    exec: Exec,
) -> Result<(Vec<SceneRecord>, Vec<PerturbationLog>)> {
    profile.validate()?;
    let out = exec.map_range(scenes.len(), |i| {
        perturb_predictions(&scenes[i], profile, vocab, seed::mix(seed, i as u64))
    });
    Ok(out.into_iter().unzip())
}
