use std::collections::BTreeMap;

use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use super::{match_detections, GroundTruth, MatchOutcome, Prediction};
use crate::scene::SignKind;

/// Class key under which all texts are tallied.
pub const TEXT_CLASS: &str = "text";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassAccuracy {
    pub correct: usize,
    pub total: usize,
}

impl ClassAccuracy {
    /// Fraction correct; 1 for an empty class.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn add(&mut self, other: ClassAccuracy) {
        self.correct += other.correct;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CharClass {
    Numeral,
    Chinese,
    English,
    Other,
}

impl CharClass {
    pub fn label(&self) -> &'static str {
        match self {
            CharClass::Numeral => "N",
            CharClass::Chinese => "C",
            CharClass::English => "E",
            CharClass::Other => "other",
        }
    }
}

pub fn char_class(c: char) -> CharClass {
    match c {
        '0'..='9' => CharClass::Numeral,
        'a'..='z' | 'A'..='Z' => CharClass::English,
        '\u{4E00}'..='\u{9FFF}' | '\u{3400}'..='\u{4DBF}' => CharClass::Chinese,
        _ => CharClass::Other,
    }
}

/// NFC plus surrounding-whitespace trim.
pub fn normalize_text(s: &str) -> String {
    s.trim().nfc().collect()
}

pub fn labels_equal(kind: SignKind, a: &str, b: &str) -> bool {
    match kind {
        SignKind::Text => normalize_text(a) == normalize_text(b),
        _ => a == b,
    }
}

/// Recognition tallies for one kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecognitionTable {
    pub per_class: BTreeMap<String, ClassAccuracy>,
    /// Texts only: aligned-character tallies per character class.
    pub per_char_class: BTreeMap<CharClass, ClassAccuracy>,
    pub detection: MatchOutcome,
    /// Matched pairs with the correct label.
    pub correct_pairs: usize,
    pub predictions: usize,
}

impl RecognitionTable {
    /// Micro-averaged accuracy over ground-truth instances.
    pub fn overall(&self) -> ClassAccuracy {
        self.per_class
            .values()
            .fold(ClassAccuracy::default(), |mut acc, c| {
                acc.add(*c);
                acc
            })
    }

    pub fn merge(&mut self, other: &RecognitionTable) {
        for (k, v) in &other.per_class {
            self.per_class.entry(k.clone()).or_default().add(*v);
        }
        for (k, v) in &other.per_char_class {
            self.per_char_class.entry(*k).or_default().add(*v);
        }
        let d = &mut self.detection;
        d.tp += other.detection.tp;
        d.fp += other.detection.fp;
        d.fn_ += other.detection.fn_;
        d.ignored_matches += other.detection.ignored_matches;
        self.correct_pairs += other.correct_pairs;
        self.predictions += other.predictions;
    }
}

/// Per-class accuracy among box-matched pairs: a ground-truth instance is
/// correct when it is matched and the matched label agrees. Texts are one
/// class compared by exact normalized string; their characters are also
/// tallied per character class through a minimal edit alignment.
pub fn recognition_accuracy(
    gt: &[GroundTruth],
    pred: &[Prediction],
    iou_threshold: f64,
) -> RecognitionTable {
    let outcome = match_detections(gt, pred, iou_threshold);
    let mut matched: Vec<Option<usize>> = vec![None; gt.len()];
    for &(gi, pi, _) in &outcome.pairs {
        matched[gi] = Some(pi);
    }
    let mut table = RecognitionTable {
        predictions: pred.len(),
        ..Default::default()
    };
    for (gi, g) in gt.iter().enumerate() {
        if g.ignored {
            continue;
        }
        let class = match g.kind {
            SignKind::Text => TEXT_CLASS.to_string(),
            _ => g.label.clone(),
        };
        let hit = matched[gi].is_some_and(|pi| labels_equal(g.kind, &g.label, &pred[pi].label));
        let entry = table.per_class.entry(class).or_default();
        entry.total += 1;
        if hit {
            entry.correct += 1;
            table.correct_pairs += 1;
        }
        if g.kind == SignKind::Text {
            let reference: Vec<char> = normalize_text(&g.label).chars().collect();
            let hypothesis: Vec<char> = matched[gi]
                .map(|pi| normalize_text(&pred[pi].label).chars().collect())
                .unwrap_or_default();
            let aligned = aligned_matches(&reference, &hypothesis);
            for (c, ok) in reference.iter().zip(aligned) {
                let e = table.per_char_class.entry(char_class(*c)).or_default();
                e.total += 1;
                e.correct += ok as usize;
            }
        }
    }
    table.detection = outcome;
    table
}

/// For each reference character, whether a minimal-cost edit script keeps
/// it unchanged. Among minimal scripts the one with most matches wins, then
/// the one preferring diagonal moves while backtracking.
fn aligned_matches(reference: &[char], hypothesis: &[char]) -> Vec<bool> {
    let (n, m) = (reference.len(), hypothesis.len());
    // (cost, -matches), minimized lexicographically
    let mut dp = vec![vec![(0usize, 0i64); m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = (i, 0);
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = (j, 0);
    }
    for i in 1..=n {
        for j in 1..=m {
            let same = reference[i - 1] == hypothesis[j - 1];
            let (c, k) = dp[i - 1][j - 1];
            let diag = if same { (c, k - 1) } else { (c + 1, k) };
            let up = (dp[i - 1][j].0 + 1, dp[i - 1][j].1);
            let left = (dp[i][j - 1].0 + 1, dp[i][j - 1].1);
            dp[i][j] = diag.min(up).min(left);
        }
    }
    let mut out = vec![false; n];
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        let same = reference[i - 1] == hypothesis[j - 1];
        let (c, k) = dp[i - 1][j - 1];
        let diag = if same { (c, k - 1) } else { (c + 1, k) };
        if dp[i][j] == diag {
            out[i - 1] = same;
            i -= 1;
            j -= 1;
        } else if dp[i][j] == (dp[i - 1][j].0 + 1, dp[i - 1][j].1) {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out
}
