use serde::Serialize;

use super::{iou, GroundTruth, Prediction};

/// Result of one-to-one box matching.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchOutcome {
    /// `(gt_index, pred_index, iou)` per accepted match.
    pub pairs: Vec<(usize, usize, f64)>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Predictions discarded because they only overlap ignored ground truth.
    pub ignored_matches: usize,
}

/// Greedy one-to-one matching by descending IoU, ties broken by lower gt
/// index then lower prediction index. Pairs need `IoU ≥ threshold` and a
/// non-empty overlap.
///
/// Only non-ignored ground truth takes part in the matching. Each leftover
/// prediction overlapping some ignored ground truth at the threshold is
/// counted in `ignored_matches` instead of `fp`.
pub fn match_detections(
    gt: &[GroundTruth],
    pred: &[Prediction],
    iou_threshold: f64,
) -> MatchOutcome {
    let overlaps: Vec<Vec<f64>> = gt
        .iter()
        .map(|g| pred.iter().map(|p| iou(&g.quad, &p.quad)).collect())
        .collect();
    let accept = |v: f64| v > 0.0 && v >= iou_threshold;

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (gi, row) in overlaps.iter().enumerate() {
        if gt[gi].ignored {
            continue;
        }
        for (pi, &v) in row.iter().enumerate() {
            if accept(v) {
                candidates.push((v, gi, pi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (v, gi, pi) in candidates {
        if gt_used[gi] || pred_used[pi] {
            continue;
        }
        gt_used[gi] = true;
        pred_used[pi] = true;
        pairs.push((gi, pi, v));
    }

    let ignored_matches = (0..pred.len())
        .filter(|&pi| !pred_used[pi])
        .filter(|&pi| (0..gt.len()).any(|gi| gt[gi].ignored && accept(overlaps[gi][pi])))
        .count();
    let tp = pairs.len();
    let targets = gt.iter().filter(|g| !g.ignored).count();
    MatchOutcome {
        pairs,
        tp,
        fp: pred.len() - tp - ignored_matches,
        fn_: targets - tp,
        ignored_matches,
    }
}
