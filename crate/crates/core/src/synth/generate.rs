//! Seeded scene generation.
//!
//! Each panel is a grid: rows stacked top to bottom, items left to right.
//! Anchoring symbols (arrows, limit signs) always open their row, so the
//! interpreter's nearest-anchor rules bind every text to its own row.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::Vocab;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{Bounds, QuadBox};
use crate::interp::{interpret_scene, Grammar, SignRef};
use crate::metrics::{is_ideograph, SlotRules};
use crate::scene::{
    default_panel_vocab, Corpus, PanelAnnotation, SceneRecord, SignKind, SymbolAnnotation,
    TextAnnotation, IGNORE_TRANSCRIPTION,
};
use crate::seed;

/// Panel classes from most to least frequent.
pub const PANEL_CLASS_RANK: [u8; 7] = [3, 4, 1, 2, 6, 5, 7];

const PLACEMENT_ATTEMPTS: usize = 100;
const PANEL_MARGIN: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_scenes: usize,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    /// Inclusive `[min, max]` ranges.
    pub panels_per_scene: (usize, usize),
    pub rows_per_panel: (usize, usize),
    /// Destinations per text row.
    pub entities_per_row: (usize, usize),
    pub language: String,
    /// Chance that a row ends with an illegible `###` text.
    pub ignored_text_rate: f64,
    /// Exponent of the Zipf weights over panel classes.
    pub zipf_s: f64,
    /// Bundled pools for the language when absent.
    pub vocab: Option<Vocab>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_scenes: 100,
            seed: 0,
            width: 3840,
            height: 2160,
            panels_per_scene: (1, 3),
            rows_per_panel: (1, 3),
            entities_per_row: (1, 3),
            language: "en".into(),
            ignored_text_rate: 0.05,
            zipf_s: 1.2,
            vocab: None,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, (lo, hi): (usize, usize), min: usize| {
            if lo > hi || lo < min {
                Err(Error::Config(format!(
                    "{name} range [{lo}, {hi}] is empty or below {min}"
                )))
            } else {
                Ok(())
            }
        };
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("image size must be positive".into()));
        }
        range("panels_per_scene", self.panels_per_scene, 0)?;
        range("rows_per_panel", self.rows_per_panel, 1)?;
        range("entities_per_row", self.entities_per_row, 1)?;
        if !(0.0..=1.0).contains(&self.ignored_text_rate) {
            return Err(Error::Config("ignored_text_rate must lie in [0, 1]".into()));
        }
        if !(self.zipf_s.is_finite() && self.zipf_s >= 0.0) {
            return Err(Error::Config(
                "zipf_s must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Hidden layout truth for one panel: its non-ignored members, row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelOracle {
    pub panel_id: u32,
    pub panel_class: u8,
    pub rows: Vec<Vec<SignRef>>,
}

impl PanelOracle {
    /// Members in grid order.
    pub fn members(&self) -> Vec<SignRef> {
        self.rows.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneOracle {
    pub image_id: String,
    pub panels: Vec<PanelOracle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScene {
    pub scene: SceneRecord,
    pub oracle: SceneOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCorpus {
    pub corpus: Corpus,
    pub oracles: Vec<SceneOracle>,
    pub slot_rules: SlotRules,
}

#[derive(Debug, Clone)]
enum Item {
    Symbol(String),
    Text(String),
}

/// A validated configuration bound to its grammar and vocabulary.
#[derive(Debug, Clone)]
pub struct Generator {
    config: GeneratorConfig,
    grammar: Grammar,
    vocab: Vocab,
    class_weights: WeightedIndex<f64>,
    arrows: Vec<String>,
    limits: Vec<String>,
    prohibitions: Vec<String>,
    warnings: Vec<String>,
    instructions: Vec<String>,
}

impl Generator {
    /// Uses the bundled grammar for `config.language`.
    pub fn new(config: GeneratorConfig) -> Result<Generator> {
        let grammar = Grammar::bundled(&config.language)?;
        Generator::with_grammar(config, grammar)
    }

    pub fn with_grammar(config: GeneratorConfig, grammar: Grammar) -> Result<Generator> {
        config.validate()?;
        let vocab = config
            .vocab
            .clone()
            .unwrap_or_else(|| Vocab::bundled(&grammar));
        vocab.check(&grammar)?;
        let weights: Vec<f64> = (1..=PANEL_CLASS_RANK.len())
            .map(|k| (k as f64).powf(-config.zipf_s))
            .collect();
        let class_weights = WeightedIndex::new(&weights)
            .map_err(|e| Error::Config(format!("panel weights: {e}")))?;
        let phrases_with = |letter: char| -> Vec<String> {
            grammar
                .phrases()
                .keys()
                .filter(|k| k.starts_with(letter))
                .cloned()
                .collect()
        };
        let g = Generator {
            arrows: grammar.actions().keys().cloned().collect(),
            limits: grammar
                .limits()
                .keys()
                .filter(|k| k.starts_with('p'))
                .cloned()
                .collect(),
            prohibitions: phrases_with('p'),
            warnings: phrases_with('w'),
            instructions: phrases_with('i'),
            config,
            grammar,
            vocab,
            class_weights,
        };
        for (name, pool) in [
            ("arrow", &g.arrows),
            ("limit", &g.limits),
            ("prohibition", &g.prohibitions),
            ("warning", &g.warnings),
            ("instruction", &g.instructions),
        ] {
            if pool.is_empty() {
                return Err(Error::Config(format!("grammar has no {name} symbols")));
            }
        }
        Ok(g)
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn slot_rules(&self) -> Result<SlotRules> {
        self.vocab.slot_rules(&self.grammar)
    }

    /// Scene `index` of the corpus, seeded by `mix(config.seed, index)`.
    pub fn scene_at(&self, index: usize) -> GeneratedScene {
        self.generate_scene(
            &format!("syn-{index:06}"),
            seed::mix(self.config.seed, index as u64),
        )
    }

    /// One scene from its own seed; descriptions come from interpreting
    /// the finished annotations.
    pub fn generate_scene(&self, image_id: &str, scene_seed: u64) -> GeneratedScene {
        let mut rng = seed::rng(scene_seed);
        let cfg = &self.config;
        let mut scene = SceneRecord::new(image_id, cfg.width, cfg.height);
        let mut oracle = SceneOracle {
            image_id: image_id.to_string(),
            panels: Vec::new(),
        };
        let n_panels = rng.random_range(cfg.panels_per_scene.0..=cfg.panels_per_scene.1);
        let mut placed: Vec<Bounds> = Vec::new();
        for _ in 0..n_panels {
            let class = PANEL_CLASS_RANK[self.class_weights.sample(&mut rng)];
            let n_rows = rng.random_range(cfg.rows_per_panel.0..=cfg.rows_per_panel.1);
            let mut rows: Vec<Vec<Item>> = (0..n_rows).map(|_| self.row(class, &mut rng)).collect();
            let u: f64 = rng.random_range(60.0..120.0);
            let origin = loop {
                let (w, h) = panel_size(&rows, u);
                if let Some(o) = place(&mut rng, w, h, cfg, &placed) {
                    break Some((o, w, h));
                }
                if rows.len() == 1 {
                    break None;
                }
                log::warn!(
                    "{image_id}: no room for a {}-row panel after {PLACEMENT_ATTEMPTS} attempts, dropping a row",
                    rows.len()
                );
                rows.pop();
            };
            let Some(((x0, y0), w, h)) = origin else {
                log::warn!("{image_id}: skipping a panel that does not fit");
                continue;
            };
            placed.push(Bounds {
                min_x: x0,
                min_y: y0,
                max_x: x0 + w,
                max_y: y0 + h,
            });
            let panel_id = scene.panels.len() as u32 + 1;
            scene.panels.push(PanelAnnotation::new(
                QuadBox::rect(x0, y0, x0 + w, y0 + h).quantized(),
                class,
                panel_id,
            ));
            let mut oracle_rows = Vec::new();
            for (r, row) in rows.iter().enumerate() {
                let cy = y0 + 0.4 * u + r as f64 * 1.4 * u + 0.5 * u;
                let mut x = x0 + 0.4 * u;
                let mut refs = Vec::new();
                for item in row {
                    let (iw, ih) = item_size(item, u);
                    let jx = rng.random_range(-0.04..0.04) * u;
                    let jy = rng.random_range(-0.04..0.04) * u;
                    let quad =
                        QuadBox::rect(x + jx, cy - ih / 2.0 + jy, x + jx + iw, cy + ih / 2.0 + jy)
                            .quantized();
                    x += iw + 0.3 * u;
                    match item {
                        Item::Symbol(code) => {
                            refs.push(SignRef {
                                kind: SignKind::Symbol,
                                index: scene.symbols.len(),
                            });
                            scene
                                .symbols
                                .push(SymbolAnnotation::new(quad, code.clone()));
                        }
                        Item::Text(t) => {
                            let ann = TextAnnotation::new(quad, t.clone());
                            if !ann.ignored {
                                refs.push(SignRef {
                                    kind: SignKind::Text,
                                    index: scene.texts.len(),
                                });
                            }
                            scene.texts.push(ann);
                        }
                    }
                }
                oracle_rows.push(refs);
            }
            oracle.panels.push(PanelOracle {
                panel_id,
                panel_class: class,
                rows: oracle_rows,
            });
        }
        let interp = interpret_scene(&scene, &self.grammar);
        for d in &interp.diagnostics {
            log::warn!(
                "{image_id}: cluster {} not described: {}",
                d.cluster,
                d.message
            );
        }
        scene.descriptions = interp.panel_descriptions();
        GeneratedScene { scene, oracle }
    }

    fn row(&self, class: u8, rng: &mut ChaCha8Rng) -> Vec<Item> {
        let mut row = match class {
            1 => {
                if rng.random_bool(0.5) {
                    self.limit_row(rng)
                } else {
                    let mut r = vec![Item::Symbol(pick(&self.prohibitions, rng))];
                    self.maybe_vehicle(&mut r, rng);
                    r
                }
            }
            2 => vec![Item::Symbol(pick(&self.warnings, rng))],
            3 => self.arrow_row(rng, 0.5),
            4 => self.arrow_row(rng, 1.0),
            5 => {
                if rng.random_bool(0.6) {
                    vec![
                        Item::Symbol(pick(&self.arrows, rng)),
                        Item::Text(pick(&self.vocab.destinations, rng)),
                    ]
                } else {
                    vec![Item::Symbol(pick(&self.instructions, rng))]
                }
            }
            6 => {
                if rng.random_bool(0.5) {
                    vec![Item::Symbol(pick(&self.instructions, rng))]
                } else {
                    self.destinations(rng)
                }
            }
            _ => {
                if rng.random_bool(0.5) {
                    self.limit_row(rng)
                } else {
                    self.arrow_row(rng, 0.3)
                }
            }
        };
        if rng.random_bool(self.config.ignored_text_rate) {
            row.push(Item::Text(IGNORE_TRANSCRIPTION.into()));
        }
        row
    }

    fn arrow_row(&self, rng: &mut ChaCha8Rng, route_rate: f64) -> Vec<Item> {
        let mut r = vec![Item::Symbol(pick(&self.arrows, rng))];
        if rng.random_bool(route_rate) {
            r.push(Item::Text(pick(&self.vocab.routes, rng)));
        }
        r.extend(self.destinations(rng));
        r
    }

    fn limit_row(&self, rng: &mut ChaCha8Rng) -> Vec<Item> {
        let code = pick(&self.limits, rng);
        let value = limit_value(&code, rng);
        let mut r = vec![Item::Symbol(code), Item::Text(value)];
        self.maybe_vehicle(&mut r, rng);
        r
    }

    fn maybe_vehicle(&self, row: &mut Vec<Item>, rng: &mut ChaCha8Rng) {
        if !self.vocab.vehicles.is_empty() && rng.random_bool(0.3) {
            row.push(Item::Text(pick(&self.vocab.vehicles, rng)));
        }
    }

    fn destinations(&self, rng: &mut ChaCha8Rng) -> Vec<Item> {
        let (lo, hi) = self.config.entities_per_row;
        let k = rng.random_range(lo..=hi).min(self.vocab.destinations.len());
        self.vocab
            .destinations
            .choose_multiple(rng, k)
            .map(|d| Item::Text(d.clone()))
            .collect()
    }
}

fn pick(pool: &[String], rng: &mut ChaCha8Rng) -> String {
    pool.choose(rng)
        .expect("pools are checked nonempty")
        .clone()
}

fn limit_value(code: &str, rng: &mut ChaCha8Rng) -> String {
    match code {
        "p1" => (rng.random_range(2..=12u32) * 10).to_string(),
        "p2" => ["3", "3.5", "4", "4.2", "4.5", "5"]
            .choose(rng)
            .expect("nonempty")
            .to_string(),
        "p3" => (rng.random_range(2..=11u32) * 5).to_string(),
        "p4" => ["2", "2.2", "2.5", "3"]
            .choose(rng)
            .expect("nonempty")
            .to_string(),
        _ => rng.random_range(1..=99u32).to_string(),
    }
}

fn item_size(item: &Item, u: f64) -> (f64, f64) {
    match item {
        Item::Symbol(_) => (u, u),
        Item::Text(t) => {
            let th = 0.6 * u;
            let em: f64 = t
                .chars()
                .map(|c| if is_ideograph(c) { 1.0 } else { 0.6 })
                .sum();
            (th * em, th)
        }
    }
}

fn panel_size(rows: &[Vec<Item>], u: f64) -> (f64, f64) {
    let widest = rows
        .iter()
        .map(|r| {
            let w: f64 = r.iter().map(|it| item_size(it, u).0).sum();
            w + 0.3 * u * r.len().saturating_sub(1) as f64
        })
        .fold(0.0, f64::max);
    let n = rows.len() as f64;
    (widest + 0.8 * u, n * u + (n - 1.0) * 0.4 * u + 0.8 * u)
}

/// Top-left corner for a `w × h` panel clear of `placed`, by rejection.
fn place(
    rng: &mut ChaCha8Rng,
    w: f64,
    h: f64,
    cfg: &GeneratorConfig,
    placed: &[Bounds],
) -> Option<(f64, f64)> {
    let (iw, ih) = (cfg.width as f64, cfg.height as f64);
    if w + 2.0 * PANEL_MARGIN > iw || h + 2.0 * PANEL_MARGIN > ih {
        return None;
    }
    for _ in 0..PLACEMENT_ATTEMPTS {
        let x = rng
            .random_range(PANEL_MARGIN..=iw - PANEL_MARGIN - w)
            .floor();
        let y = rng
            .random_range(PANEL_MARGIN..=ih - PANEL_MARGIN - h)
            .floor();
        let grown = Bounds {
            min_x: x - PANEL_MARGIN,
            min_y: y - PANEL_MARGIN,
            max_x: x + w + PANEL_MARGIN,
            max_y: y + h + PANEL_MARGIN,
        };
        if !placed.iter().any(|b| b.intersects(&grown)) {
            return Some((x, y));
        }
    }
    None
}

/// Generates `config.n_scenes` scenes. Scene `i` depends only on
/// `mix(config.seed, i)`, so the corpus is the same under any executor.
pub fn generate_corpus(generator: &Generator, exec: Exec) -> Result<GeneratedCorpus> {
    let scenes = exec.map_range(generator.config.n_scenes, |i| generator.scene_at(i));
    let (scenes, oracles): (Vec<_>, Vec<_>) =
        scenes.into_iter().map(|g| (g.scene, g.oracle)).unzip();
    Ok(GeneratedCorpus {
        corpus: Corpus::with_vocab(
            scenes,
            generator.grammar.symbol_names(),
            default_panel_vocab(),
        ),
        oracles,
        slot_rules: generator.slot_rules()?,
    })
}
