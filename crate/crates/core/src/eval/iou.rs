use crate::geometry::{
    clip_convex, convex_hull, is_convex, oriented_positive, signed_area, QuadBox,
};

/// Intersection over union of two boxes by convex clipping. Non-convex
/// boxes are replaced by their hulls; degenerate boxes score 0.
pub fn iou(a: &QuadBox, b: &QuadBox) -> f64 {
    if !a.bounds().intersects(&b.bounds()) {
        return 0.0;
    }
    let (pa, pb) = (prepare(a), prepare(b));
    let (area_a, area_b) = (signed_area(&pa), signed_area(&pb));
    if area_a <= 0.0 || area_b <= 0.0 {
        log::warn!("degenerate box in IoU; scoring 0");
        return 0.0;
    }
    let inter = signed_area(&clip_convex(&pa, &pb)).max(0.0);
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

fn prepare(q: &QuadBox) -> Vec<crate::geometry::Point2D> {
    let pts = oriented_positive(&q.corners);
    if is_convex(&pts) {
        pts
    } else {
        log::debug!("non-convex box replaced by its hull for IoU");
        convex_hull(&pts)
    }
}
