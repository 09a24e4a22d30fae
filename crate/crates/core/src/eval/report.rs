use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::recognition::TEXT_CLASS;
use super::{
    ground_truth_of, match_detections, predictions_of, recognition_accuracy, CharClass,
    ClassAccuracy, MatchOutcome, Prf, RecognitionTable, DEFAULT_IOU_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::scene::{SceneRecord, SignKind};

/// IoU thresholds per sign kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub symbol_iou: f64,
    pub text_iou: f64,
    pub panel_iou: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig::uniform(DEFAULT_IOU_THRESHOLD)
    }
}

impl EvalConfig {
    pub fn uniform(threshold: f64) -> Self {
        EvalConfig {
            symbol_iou: threshold,
            text_iou: threshold,
            panel_iou: threshold,
        }
    }

    pub fn threshold(&self, kind: SignKind) -> f64 {
        match kind {
            SignKind::Symbol => self.symbol_iou,
            SignKind::Text => self.text_iou,
            SignKind::Panel => self.panel_iou,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in SignKind::ALL {
            let t = self.threshold(kind);
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!(
                    "{} IoU threshold {t} must lie in (0, 1]",
                    kind.as_str()
                )));
            }
        }
        Ok(())
    }
}

/// Pairs each ground-truth scene with the prediction of the same
/// `image_id`. Both sides must cover the same set of images.
pub fn align_scenes<'a>(
    gt: &'a [SceneRecord],
    pred: &'a [SceneRecord],
) -> Result<Vec<(&'a SceneRecord, &'a SceneRecord)>> {
    let by_id: HashMap<&str, &SceneRecord> =
        pred.iter().map(|s| (s.image_id.as_str(), s)).collect();
    let gt_ids: BTreeSet<&str> = gt.iter().map(|s| s.image_id.as_str()).collect();
    let missing: Vec<&str> = gt_ids
        .iter()
        .copied()
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let extra: BTreeSet<&str> = by_id
        .keys()
        .copied()
        .filter(|id| !gt_ids.contains(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let example = missing
            .first()
            .or(extra.iter().next())
            .map(|s| s.to_string())
            .unwrap_or_default();
        return Err(Error::ImageSetMismatch {
            missing: missing.len(),
            extra: extra.len(),
            example,
        });
    }
    Ok(gt.iter().map(|g| (g, by_id[g.image_id.as_str()])).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindDetection {
    pub kind: SignKind,
    pub iou_threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ignored_matches: usize,
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub scenes: usize,
    pub kinds: Vec<KindDetection>,
}

fn add_counts(mut a: MatchOutcome, b: MatchOutcome) -> MatchOutcome {
    a.tp += b.tp;
    a.fp += b.fp;
    a.fn_ += b.fn_;
    a.ignored_matches += b.ignored_matches;
    a
}

/// Box-only counts summed over all scenes, per kind.
pub fn evaluate_detection(
    gt: &[SceneRecord],
    pred: &[SceneRecord],
    config: &EvalConfig,
    exec: Exec,
) -> Result<DetectionReport> {
    config.validate()?;
    let pairs = align_scenes(gt, pred)?;
    let kinds = SignKind::ALL
        .iter()
        .map(|&kind| {
            let thr = config.threshold(kind);
            let total = exec.map_reduce(
                &pairs,
                MatchOutcome::default(),
                |(g, p)| {
                    let mut o =
                        match_detections(&ground_truth_of(g, kind), &predictions_of(p, kind), thr);
                    o.pairs.clear();
                    o
                },
                add_counts,
            );
            KindDetection {
                kind,
                iou_threshold: thr,
                tp: total.tp,
                fp: total.fp,
                fn_: total.fn_,
                ignored_matches: total.ignored_matches,
                prf: Prf::from_counts(total.tp, total.fp, total.fn_),
            }
        })
        .collect();
    Ok(DetectionReport {
        scenes: pairs.len(),
        kinds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindRecognition {
    pub kind: SignKind,
    pub iou_threshold: f64,
    pub per_class: BTreeMap<String, ClassAccuracy>,
    pub per_char_class: BTreeMap<CharClass, ClassAccuracy>,
    /// Micro-averaged accuracy over non-ignored ground truth.
    pub overall: ClassAccuracy,
    /// Counts where a true positive also needs the right label.
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub prf: Prf,
    /// Box-only recall, an upper bound on `overall`.
    pub detection_recall: f64,
}

impl KindRecognition {
    fn from_table(kind: SignKind, iou_threshold: f64, t: RecognitionTable) -> Self {
        let overall = t.overall();
        let tp = t.correct_pairs;
        let fp = t.predictions - t.detection.ignored_matches - tp;
        let fn_ = overall.total - tp;
        KindRecognition {
            kind,
            iou_threshold,
            overall,
            tp,
            fp,
            fn_,
            prf: Prf::from_counts(tp, fp, fn_),
            detection_recall: Prf::from_counts(t.detection.tp, t.detection.fp, t.detection.fn_)
                .recall,
            per_class: t.per_class,
            per_char_class: t.per_char_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognitionReport {
    pub scenes: usize,
    pub kinds: Vec<KindRecognition>,
}

impl RecognitionReport {
    /// Micro-average over every kind.
    pub fn overall(&self) -> ClassAccuracy {
        self.kinds
            .iter()
            .fold(ClassAccuracy::default(), |mut a, k| {
                a.add(k.overall);
                a
            })
    }

    pub fn kind(&self, kind: SignKind) -> Option<&KindRecognition> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

impl DetectionReport {
    pub fn kind(&self, kind: SignKind) -> Option<&KindDetection> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

pub fn evaluate_recognition(
    gt: &[SceneRecord],
    pred: &[SceneRecord],
    config: &EvalConfig,
    exec: Exec,
) -> Result<RecognitionReport> {
    config.validate()?;
    let pairs = align_scenes(gt, pred)?;
    let kinds = SignKind::ALL
        .iter()
        .map(|&kind| {
            let thr = config.threshold(kind);
            let table = exec.map_reduce(
                &pairs,
                RecognitionTable::default(),
                |(g, p)| {
                    let mut t = recognition_accuracy(
                        &ground_truth_of(g, kind),
                        &predictions_of(p, kind),
                        thr,
                    );
                    t.detection.pairs.clear();
                    t
                },
                |mut a, b| {
                    a.merge(&b);
                    a
                },
            );
            KindRecognition::from_table(kind, thr, table)
        })
        .collect();
    Ok(RecognitionReport {
        scenes: pairs.len(),
        kinds,
    })
}

/// Fraction as a percentage rounded to two decimals.
pub fn percent(x: f64) -> f64 {
    (x * 10_000.0).round() / 100.0
}

impl DetectionReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8} {:>8}",
            "kind", "TP", "FP", "FN", "IGN", "P", "R", "F"
        );
        for k in &self.kinds {
            let _ = writeln!(
                out,
                "{:<8} {:>6} {:>6} {:>6} {:>6} {:>8.2} {:>8.2} {:>8.2}",
                k.kind.as_str(),
                k.tp,
                k.fp,
                k.fn_,
                k.ignored_matches,
                percent(k.prf.precision),
                percent(k.prf.recall),
                percent(k.prf.f_measure)
            );
        }
        out
    }
}

impl RecognitionReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8} {:>8}",
            "kind", "P", "R", "F", "OA"
        );
        for k in &self.kinds {
            let _ = writeln!(
                out,
                "{:<8} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
                k.kind.as_str(),
                percent(k.prf.precision),
                percent(k.prf.recall),
                percent(k.prf.f_measure),
                percent(k.overall.accuracy())
            );
        }
        let _ = writeln!(
            out,
            "{:<8} {:>35.2}",
            "all",
            percent(self.overall().accuracy())
        );
        if let Some(text) = self.kind(SignKind::Text) {
            if !text.per_char_class.is_empty() {
                out.push('\n');
                let header: Vec<String> = text
                    .per_char_class
                    .keys()
                    .map(|c| format!("{:>8}", c.label()))
                    .collect();
                let _ = writeln!(out, "{:<8} {}", TEXT_CLASS, header.join(" "));
                let row: Vec<String> = text
                    .per_char_class
                    .values()
                    .map(|a| format!("{:>8.2}", percent(a.accuracy())))
                    .collect();
                let _ = writeln!(out, "{:<8} {}", "acc", row.join(" "));
            }
        }
        for k in &self.kinds {
            if k.kind == SignKind::Text || k.per_class.is_empty() {
                continue;
            }
            out.push('\n');
            let _ = writeln!(
                out,
                "{:<8} {:>6} {:>6} {:>8}",
                k.kind.as_str(),
                "n",
                "ok",
                "acc"
            );
            for (class, a) in &k.per_class {
                let _ = writeln!(
                    out,
                    "{:<8} {:>6} {:>6} {:>8.2}",
                    class,
                    a.total,
                    a.correct,
                    percent(a.accuracy())
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadBox;
    use crate::scene::{PanelAnnotation, SymbolAnnotation, TextAnnotation};

    fn scene(id: &str) -> SceneRecord {
        let mut s = SceneRecord::new(id, 100, 100);
        s.panels.push(PanelAnnotation::new(
            QuadBox::rect(0.0, 0.0, 90.0, 90.0),
            3,
            1,
        ));
        s.symbols.push(SymbolAnnotation::new(
            QuadBox::rect(5.0, 5.0, 15.0, 15.0),
            "a1",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(20.0, 5.0, 40.0, 15.0),
            "G70",
        ));
        s.texts.push(TextAnnotation::new(
            QuadBox::rect(20.0, 30.0, 40.0, 40.0),
            "###",
        ));
        s
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let gt = vec![scene("a"), scene("b")];
        let det = evaluate_detection(&gt, &gt, &EvalConfig::default(), Exec::Parallel).unwrap();
        for k in &det.kinds {
            assert_eq!(k.prf.f_measure, 1.0, "{:?}", k.kind);
        }
        assert_eq!(det.kind(SignKind::Text).unwrap().ignored_matches, 2);
        let rec = evaluate_recognition(&gt, &gt, &EvalConfig::default(), Exec::Sequential).unwrap();
        assert_eq!(rec.overall().accuracy(), 1.0);
        assert_eq!(rec.kind(SignKind::Text).unwrap().prf.f_measure, 1.0);
        assert!(rec.render_text().contains("100.00"));
        assert!(det.render_text().contains("100.00"));
    }

    #[test]
    fn image_sets_must_agree() {
        let gt = vec![scene("a"), scene("b")];
        let pred = vec![scene("a"), scene("c")];
        match align_scenes(&gt, &pred) {
            Err(Error::ImageSetMismatch {
                missing,
                extra,
                example,
            }) => {
                assert_eq!((missing, extra), (1, 1));
                assert_eq!(example, "b");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prediction_order_does_not_matter() {
        let gt = vec![scene("a"), scene("b")];
        let pred = vec![scene("b"), scene("a")];
        let det = evaluate_detection(&gt, &pred, &EvalConfig::default(), Exec::Sequential).unwrap();
        assert_eq!(det.kind(SignKind::Symbol).unwrap().tp, 2);
    }

    #[test]
    fn wrong_label_counts_against_recognition_only() {
        let gt = vec![scene("a")];
        let mut p = scene("a");
        p.symbols[0].class_code = "a2".into();
        let pred = vec![p];
        let det = evaluate_detection(&gt, &pred, &EvalConfig::default(), Exec::Sequential).unwrap();
        assert_eq!(det.kind(SignKind::Symbol).unwrap().prf.f_measure, 1.0);
        let rec =
            evaluate_recognition(&gt, &pred, &EvalConfig::default(), Exec::Sequential).unwrap();
        let s = rec.kind(SignKind::Symbol).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_), (0, 1, 1));
        assert_eq!(s.overall.accuracy(), 0.0);
        assert!(s.overall.accuracy() <= s.detection_recall);
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(2.0 / 3.0), 66.67);
        assert_eq!(percent(1.0), 100.0);
    }
}
