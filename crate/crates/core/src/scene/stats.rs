use std::collections::BTreeMap;

use serde::Serialize;

use super::{Corpus, SceneRecord};
use crate::exec::Exec;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KindStats {
    pub count: usize,
    pub mean_area: f64,
}

/// Per-category counts and size summaries for a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CategoryHistogram {
    pub scenes: usize,
    pub symbol_counts: BTreeMap<String, usize>,
    pub panel_counts: BTreeMap<u8, usize>,
    pub ignored_texts: usize,
    /// Characters over non-ignored transcriptions.
    pub text_characters: usize,
    pub descriptions: usize,
    pub description_characters: usize,
    pub symbols: KindStats,
    pub texts: KindStats,
    pub panels: KindStats,
}

impl CategoryHistogram {
    /// Relative frequency of each panel class among all panels.
    pub fn panel_frequencies(&self) -> BTreeMap<u8, f64> {
        let total: usize = self.panel_counts.values().sum();
        self.panel_counts
            .iter()
            .map(|(&c, &n)| {
                (
                    c,
                    if total == 0 {
                        0.0
                    } else {
                        n as f64 / total as f64
                    },
                )
            })
            .collect()
    }
}

#[derive(Default)]
struct Partial {
    symbol_counts: BTreeMap<String, usize>,
    panel_counts: BTreeMap<u8, usize>,
    ignored_texts: usize,
    text_characters: usize,
    descriptions: usize,
    description_characters: usize,
    // (count, area sum) per kind
    symbols: (usize, f64),
    texts: (usize, f64),
    panels: (usize, f64),
}

fn scene_partial(scene: &SceneRecord) -> Partial {
    let mut p = Partial::default();
    for s in &scene.symbols {
        *p.symbol_counts.entry(s.class_code.clone()).or_default() += 1;
        p.symbols.0 += 1;
        p.symbols.1 += s.quad.area();
    }
    for t in &scene.texts {
        p.texts.0 += 1;
        p.texts.1 += t.quad.area();
        if t.ignored {
            p.ignored_texts += 1;
        } else {
            p.text_characters += t.transcription.chars().count();
        }
    }
    for panel in &scene.panels {
        *p.panel_counts.entry(panel.panel_class).or_default() += 1;
        p.panels.0 += 1;
        p.panels.1 += panel.quad.area();
    }
    p.descriptions = scene.descriptions.len();
    p.description_characters = scene
        .descriptions
        .iter()
        .map(|d| d.text.chars().count())
        .sum();
    p
}

fn mean(count: usize, sum: f64) -> KindStats {
    KindStats {
        count,
        mean_area: if count == 0 { 0.0 } else { sum / count as f64 },
    }
}

/// Histogram over all scenes. Per-scene partials are computed under `exec`
/// and folded in scene order, so floating sums are reproducible.
pub fn corpus_stats(corpus: &Corpus, exec: Exec) -> CategoryHistogram {
    let partials = exec.map(&corpus.scenes, scene_partial);
    let mut acc = Partial::default();
    for p in partials {
        for (k, v) in p.symbol_counts {
            *acc.symbol_counts.entry(k).or_default() += v;
        }
        for (k, v) in p.panel_counts {
            *acc.panel_counts.entry(k).or_default() += v;
        }
        acc.ignored_texts += p.ignored_texts;
        acc.text_characters += p.text_characters;
        acc.descriptions += p.descriptions;
        acc.description_characters += p.description_characters;
        for (a, b) in [
            (&mut acc.symbols, p.symbols),
            (&mut acc.texts, p.texts),
            (&mut acc.panels, p.panels),
        ] {
            a.0 += b.0;
            a.1 += b.1;
        }
    }
    CategoryHistogram {
        scenes: corpus.scenes.len(),
        symbol_counts: acc.symbol_counts,
        panel_counts: acc.panel_counts,
        ignored_texts: acc.ignored_texts,
        text_characters: acc.text_characters,
        descriptions: acc.descriptions,
        description_characters: acc.description_characters,
        symbols: mean(acc.symbols.0, acc.symbols.1),
        texts: mean(acc.texts.0, acc.texts.1),
        panels: mean(acc.panels.0, acc.panels.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadBox;
    use crate::scene::{SymbolAnnotation, TextAnnotation};

    #[test]
    fn empty_corpus_is_all_zero() {
        assert_eq!(
            corpus_stats(&Corpus::default(), Exec::Sequential),
            CategoryHistogram::default()
        );
    }

    #[test]
    fn counts_symbols() {
        let mut s = SceneRecord::new("a", 100, 100);
        for _ in 0..2 {
            s.symbols.push(SymbolAnnotation::new(
                QuadBox::rect(0.0, 0.0, 2.0, 3.0),
                "a1",
            ));
        }
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(0.0, 0.0, 1.0, 1.0),
            "###",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(0.0, 0.0, 1.0, 1.0),
            "西安",
        ));
        let h = corpus_stats(&Corpus::new(vec![s]), Exec::Parallel);
        assert_eq!(h.symbol_counts["a1"], 2);
        assert_eq!(h.symbols.mean_area, 6.0);
        assert_eq!(h.ignored_texts, 1);
        assert_eq!(h.text_characters, 2);
    }
}
