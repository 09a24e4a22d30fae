//! Description metrics: ROUGE-1/2/L, BLEU-4 and Soft Accuracy.

mod frame;
mod ngram;
mod tokenize;

use serde::Serialize;

pub use frame::{
    collapse_slot_lists, extract_frame, frame_match, soft_accuracy, FrameToken, RegexSlot,
    SlotRules, SyntaxFrame, MAX_SLOT_SPAN,
};
pub use ngram::{
    bleu_4, clipped_overlap, lcs_len, ngram_total, rouge_l, rouge_n, NgramStats, BLEU_FLOOR,
    BLEU_ORDER,
};
pub use tokenize::{is_ideograph, tokenize, TokenSeq, TokenizerMode};

use crate::error::{Error, Result};
use crate::eval::percent;
use crate::exec::Exec;

/// Corpus-level scores as fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricScores {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub bleu4: f64,
    pub soft_accuracy: f64,
}

/// Percentages with two decimals under the table column names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "Rl")]
    pub rl: f64,
    #[serde(rename = "B4")]
    pub b4: f64,
    #[serde(rename = "SA")]
    pub sa: f64,
}

impl MetricScores {
    pub fn report(&self) -> MetricReport {
        MetricReport {
            r1: percent(self.rouge1),
            r2: percent(self.rouge2),
            rl: percent(self.rouge_l),
            b4: percent(self.bleu4),
            sa: percent(self.soft_accuracy),
        }
    }
}

impl MetricReport {
    pub fn render_text(&self) -> String {
        format!(
            "{:>8} {:>8} {:>8} {:>8} {:>8}\n{:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2}\n",
            "R-1", "R-2", "R-l", "B-4", "SA", self.r1, self.r2, self.rl, self.b4, self.sa
        )
    }
}

/// Scores a candidate corpus against references, pair by pair. Each
/// sentence is tokenized under `mode`; n-gram and LCS counts are summed
/// before the ratios are taken.
pub fn evaluate_descriptions(
    candidates: &[String],
    references: &[String],
    rules: &SlotRules,
    mode: TokenizerMode,
    exec: Exec,
) -> Result<MetricScores> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    let pairs: Vec<(&String, &String)> = candidates.iter().zip(references).collect();
    let (stats, hits) = exec.map_reduce(
        &pairs,
        (NgramStats::default(), 0usize),
        |(c, r)| {
            let s = NgramStats::of_pair(&tokenize(c, mode), &tokenize(r, mode));
            (s, frame_match(c, r, rules, mode) as usize)
        },
        |(a, x), (b, y)| (a.merge(b), x + y),
    );
    let soft_accuracy = if pairs.is_empty() {
        1.0
    } else {
        hits as f64 / pairs.len() as f64
    };
    Ok(MetricScores {
        rouge1: stats.rouge_n(1),
        rouge2: stats.rouge_n(2),
        rouge_l: stats.rouge_l(),
        bleu4: stats.bleu_4(),
        soft_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> SlotRules {
        SlotRules::new(
            vec![RegexSlot {
                pattern: r"[GS]\d+".into(),
                slot: "route".into(),
            }],
            [("Xi'an", "dest"), ("Xianyang", "dest")]
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_corpora_score_one() {
        let c: Vec<String> = [
            "Go straight along G70 to Xi'an, Xianyang",
            "Turn left",
            "直行",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let s =
            evaluate_descriptions(&c, &c, &rules(), TokenizerMode::Auto, Exec::Parallel).unwrap();
        assert_eq!(
            s.report(),
            MetricReport {
                r1: 100.0,
                r2: 100.0,
                rl: 100.0,
                b4: 100.0,
                sa: 100.0
            }
        );
    }

    #[test]
    fn reordered_destinations() {
        let a = vec!["Go straight along G70 to Xi'an, Xianyang".to_string()];
        let b = vec!["Go straight along G70 to Xianyang, Xi'an".to_string()];
        let s =
            evaluate_descriptions(&a, &b, &rules(), TokenizerMode::Auto, Exec::Sequential).unwrap();
        assert_eq!(s.rouge1, 1.0);
        assert!(s.rouge2 < 1.0);
        assert!(s.bleu4 < 1.0);
        assert_eq!(s.soft_accuracy, 1.0);
    }

    #[test]
    fn report_text_has_columns() {
        let r = MetricReport {
            r1: 1.0,
            r2: 2.0,
            rl: 3.0,
            b4: 4.0,
            sa: 5.0,
        };
        let t = r.render_text();
        assert!(t.contains("R-1") && t.contains("5.00"));
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["Rl"], 3.0);
    }
}
