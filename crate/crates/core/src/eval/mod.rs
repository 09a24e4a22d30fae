//! Detection and recognition evaluation.
//!
//! Detection counts TP/FP/FN from box overlap alone; recognition also
//! requires the matched label to be right. Ignored ground truth (`###`
//! texts, flagged symbols) never counts as a miss, and a prediction that
//! only overlaps ignored ground truth is discarded rather than counted as
//! a false positive.

mod iou;
mod matching;
mod recognition;
mod report;

use serde::Serialize;

pub use iou::iou;
pub use matching::{match_detections, MatchOutcome};
pub use recognition::{
    char_class, labels_equal, normalize_text, recognition_accuracy, CharClass, ClassAccuracy,
    RecognitionTable,
};
pub use report::{
    align_scenes, evaluate_detection, evaluate_recognition, percent, DetectionReport, EvalConfig,
    KindDetection, KindRecognition, RecognitionReport,
};

use crate::error::{Error, Result};
use crate::geometry::QuadBox;
use crate::scene::{split_class_code, SceneRecord, SignKind, PANEL_CLASSES};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// One detector/recognizer output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub quad: QuadBox,
    pub kind: SignKind,
    /// Class code, transcription or panel class, by kind.
    pub label: String,
    pub score: f64,
}

impl Prediction {
    /// Checks that `label` is well-formed for `kind` and `score ∈ [0,1]`.
    pub fn new(
        quad: QuadBox,
        kind: SignKind,
        label: impl Into<String>,
        score: f64,
    ) -> Result<Self> {
        let label = label.into();
        let ok = match kind {
            SignKind::Symbol => split_class_code(&label).is_some(),
            SignKind::Text => !label.is_empty(),
            SignKind::Panel => label
                .parse::<u8>()
                .is_ok_and(|c| PANEL_CLASSES.contains(&c)),
        };
        if !ok {
            return Err(Error::Validation {
                field: "label".into(),
                message: format!("`{label}` is not a valid {} label", kind.as_str()),
            });
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation {
                field: "score".into(),
                message: format!("score {score} outside [0,1]"),
            });
        }
        Ok(Prediction {
            quad,
            kind,
            label,
            score,
        })
    }
}

/// One ground-truth sign of a given kind.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub quad: QuadBox,
    pub kind: SignKind,
    pub label: String,
    pub ignored: bool,
}

pub fn ground_truth_of(scene: &SceneRecord, kind: SignKind) -> Vec<GroundTruth> {
    match kind {
        SignKind::Symbol => scene
            .symbols
            .iter()
            .map(|s| GroundTruth {
                quad: s.quad,
                kind,
                label: s.class_code.clone(),
                ignored: s.ignored,
            })
            .collect(),
        SignKind::Text => scene
            .texts
            .iter()
            .map(|t| GroundTruth {
                quad: t.quad,
                kind,
                label: t.transcription.clone(),
                ignored: t.ignored,
            })
            .collect(),
        SignKind::Panel => scene
            .panels
            .iter()
            .map(|p| GroundTruth {
                quad: p.quad,
                kind,
                label: p.panel_class.to_string(),
                ignored: false,
            })
            .collect(),
    }
}

/// Reads the signs of a prediction record; entries without a score count
/// as fully confident.
pub fn predictions_of(scene: &SceneRecord, kind: SignKind) -> Vec<Prediction> {
    let mk = |quad: QuadBox, label: String, score: Option<f64>| Prediction {
        quad,
        kind,
        label,
        score: score.unwrap_or(1.0),
    };
    match kind {
        SignKind::Symbol => scene
            .symbols
            .iter()
            .map(|s| mk(s.quad, s.class_code.clone(), s.score))
            .collect(),
        SignKind::Text => scene
            .texts
            .iter()
            .map(|t| mk(t.quad, t.transcription.clone(), t.score))
            .collect(),
        SignKind::Panel => scene
            .panels
            .iter()
            .map(|p| mk(p.quad, p.panel_class.to_string(), p.score))
            .collect(),
    }
}

/// Precision, recall and their harmonic mean, as fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        if tp + fp == 0 && tp + fn_ == 0 {
            return Prf {
                precision: 1.0,
                recall: 1.0,
                f_measure: 1.0,
            };
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f_measure,
        }
    }
}

pub fn prf(outcome: &MatchOutcome) -> Prf {
    Prf::from_counts(outcome.tp, outcome.fp, outcome.fn_)
}

/// Classification loss of one probability vector: `−ln p[target]`, with the
/// probability floored at `1e-12`.
pub fn cross_entropy(prob: &[f64], target: usize) -> Result<f64> {
    if target >= prob.len() {
        return Err(Error::IndexOutOfRange {
            index: target,
            len: prob.len(),
        });
    }
    let sum: f64 = prob.iter().sum();
    if (sum - 1.0).abs() > 1e-6 || prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Validation {
            field: "prob".into(),
            message: format!("not a probability vector (sum {sum})"),
        });
    }
    Ok((-prob[target].max(1e-12).ln()).max(0.0))
}

/// Index of the most probable category (first on ties).
pub fn decode_category(prob: &[f64]) -> Option<usize> {
    prob.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((i, p)),
        })
        .map(|(i, _)| i)
}
