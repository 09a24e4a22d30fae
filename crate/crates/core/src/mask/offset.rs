//! Uniform edge offsetting: every edge moves along its normal by the same
//! distance and neighbouring offset edges are re-intersected (mitre joins).
//! Rectangles stay rectangles, so shrink followed by expand is exact.

use crate::error::{GeometryError, Result};
use crate::geometry::{line_intersection, signed_area, Point2D, Polygon, QuadBox};

/// Moves every edge of `quad` inward by `distance`.
pub fn shrink_contour(quad: &QuadBox, distance: f64) -> Result<Polygon> {
    offset_polygon(&quad.to_polygon(), -distance, true)
}

/// Moves every edge of `poly` outward by `distance`.
pub fn expand_contour(poly: &Polygon, distance: f64) -> Result<Polygon> {
    offset_polygon(poly, distance, false)
}

fn unit(a: &Point2D, b: &Point2D) -> Point2D {
    let d = b.sub(a);
    let len = d.x.hypot(d.y);
    Point2D::new(d.x / len, d.y / len)
}

/// `delta > 0` grows the polygon. With `strict`, an offset that flips an
/// edge or the orientation is reported as over-shrunk.
fn offset_polygon(poly: &Polygon, delta: f64, strict: bool) -> Result<Polygon> {
    let base = poly.simplified();
    let pts = base.points();
    let n = pts.len();
    let area = signed_area(pts);
    if n < 3 || area.abs() <= 1e-12 {
        return Err(GeometryError::DegeneratePolygon.into());
    }
    let sigma = area.signum();
    // Outward normal of a positively oriented edge with direction u is
    // (u.y, -u.x) in y-down coordinates.
    let dirs: Vec<Point2D> = (0..n).map(|i| unit(&pts[i], &pts[(i + 1) % n])).collect();
    let normals: Vec<Point2D> = dirs
        .iter()
        .map(|u| Point2D::new(sigma * u.y, -sigma * u.x))
        .collect();
    let out: Vec<Point2D> = (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let a0 = pts[prev].add(&normals[prev].scale(delta));
            let a1 = pts[i].add(&normals[prev].scale(delta));
            let b0 = pts[i].add(&normals[i].scale(delta));
            let b1 = pts[(i + 1) % n].add(&normals[i].scale(delta));
            let cross = dirs[prev].x * dirs[i].y - dirs[prev].y * dirs[i].x;
            if cross.abs() < 1e-12 {
                b0
            } else {
                line_intersection(&a0, &a1, &b0, &b1)
            }
        })
        .collect();
    if strict {
        let new_area = signed_area(&out);
        let flipped = (0..n).any(|i| {
            let e = out[(i + 1) % n].sub(&out[i]);
            e.x * dirs[i].x + e.y * dirs[i].y <= 0.0
        });
        if flipped || new_area * sigma <= 0.0 {
            return Err(GeometryError::OverShrunk.into());
        }
    }
    Ok(Polygon(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn assert_close(poly: &Polygon, expected: &QuadBox) {
        assert_eq!(poly.points().len(), 4);
        for (p, q) in poly.points().iter().zip(&expected.corners) {
            assert!(p.dist(q) < 1e-9, "{p:?} vs {q:?}");
        }
    }

    #[test]
    fn square_shrinks_concentrically() {
        let s = shrink_contour(&QuadBox::rect(0.0, 0.0, 4.0, 4.0), 1.0).unwrap();
        assert_close(&s, &QuadBox::rect(1.0, 1.0, 3.0, 3.0));
    }

    #[test]
    fn rectangle_shrink_and_expand() {
        let s = shrink_contour(&QuadBox::rect(0.0, 0.0, 4.0, 2.0), 0.5).unwrap();
        assert_close(&s, &QuadBox::rect(0.5, 0.5, 3.5, 1.5));
        let e = expand_contour(&s, 0.5).unwrap();
        assert_close(&e, &QuadBox::rect(0.0, 0.0, 4.0, 2.0));
    }

    #[test]
    fn square_expands() {
        let e = expand_contour(&QuadBox::rect(1.0, 1.0, 3.0, 3.0).to_polygon(), 1.0).unwrap();
        assert_close(&e, &QuadBox::rect(0.0, 0.0, 4.0, 4.0));
    }

    #[test]
    fn counter_clockwise_input_shrinks_inward() {
        let mut q = QuadBox::rect(0.0, 0.0, 4.0, 4.0);
        q.corners.reverse();
        let s = shrink_contour(&q, 1.0).unwrap();
        assert!((s.area() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn over_shrink_is_an_error() {
        let r = shrink_contour(&QuadBox::rect(0.0, 0.0, 4.0, 2.0), 1.5);
        assert!(matches!(r, Err(Error::Geometry(GeometryError::OverShrunk))));
    }
}
