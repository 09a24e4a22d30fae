//! Dense boundary sampling and the centre-to-boundary offsets used to build
//! shrink-mask labels and to expand predicted masks back to sign boxes.

use crate::error::{GeometryError, Result};
use crate::geometry::{
    point_in_polygon, point_segment_distance, polygon_centroid, Point2D, Polygon, QuadBox,
};

pub const MIN_CONTOUR_POINTS: usize = 16;
pub const DEFAULT_MAX_SPACING: f64 = 2.0;

/// Closed, densely sampled boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseContour {
    points: Vec<Point2D>,
    /// Area centroid of the sampled outline. Samples skip most corners, so
    /// the polygon through them would put the centre slightly off.
    centroid: Point2D,
}

impl DenseContour {
    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between consecutive points, closing edge included.
    pub fn max_spacing(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| self.points[i].dist(&self.points[(i + 1) % n]))
            .fold(0.0, f64::max)
    }

    pub fn within_spacing(&self, max_spacing: f64) -> bool {
        self.max_spacing() <= max_spacing * (1.0 + 1e-9)
    }
}

/// `max(64, ⌈perimeter / 2⌉)`: keeps neighbouring samples at most 2 px apart.
pub fn default_sample_count(perimeter: f64) -> usize {
    ((perimeter / DEFAULT_MAX_SPACING).ceil() as usize).max(64)
}

/// `n` points evenly spaced by arc length along the box, starting at
/// corner 0.
pub fn sample_dense_contour(quad: &QuadBox, n: usize) -> Result<DenseContour> {
    sample_polygon(&quad.to_polygon(), n)
}

pub fn sample_polygon(poly: &Polygon, n: usize) -> Result<DenseContour> {
    if n < MIN_CONTOUR_POINTS {
        return Err(GeometryError::TooFewSamples.into());
    }
    let pts = poly.points();
    let perimeter = poly.perimeter();
    if pts.len() < 3
        || perimeter.is_nan()
        || perimeter <= 0.0
        || poly.area() <= 1e-12 * perimeter * perimeter
    {
        return Err(GeometryError::DegeneratePolygon.into());
    }
    let m = pts.len();
    let step = perimeter / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut edge = 0;
    let mut edge_start = 0.0;
    let mut edge_len = pts[0].dist(&pts[1 % m]);
    for k in 0..n {
        let s = k as f64 * step;
        while s > edge_start + edge_len && edge + 1 < m {
            edge_start += edge_len;
            edge += 1;
            edge_len = pts[edge].dist(&pts[(edge + 1) % m]);
        }
        let a = pts[edge];
        let b = pts[(edge + 1) % m];
        let t = if edge_len > 0.0 {
            ((s - edge_start) / edge_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(Point2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }
    Ok(DenseContour {
        points: out,
        centroid: polygon_centroid(pts),
    })
}

/// Area centroid of the polygon the contour encloses.
pub fn centroid(contour: &DenseContour) -> Point2D {
    contour.centroid
}

/// Minimum distance from the contour centroid to the sampled boundary.
///
/// The minimum is taken over the polyline through the samples, which is
/// the dense-sampling limit of the point-wise minimum: it never exceeds the
/// minimum over the samples and differs from it by at most
/// `spacing² / (8 · result)`.
pub fn polar_min_distance(contour: &DenseContour) -> Result<f64> {
    let pts = &contour.points;
    let c = centroid(contour);
    if !point_in_polygon(&c, pts) {
        return Err(GeometryError::CentroidExterior.into());
    }
    let n = pts.len();
    Ok((0..n)
        .map(|i| point_segment_distance(&c, &pts[i], &pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min))
}

/// Label-time shrink offset: half the polar minimum distance.
pub fn shrink_offset(contour: &DenseContour) -> Result<f64> {
    Ok(0.5 * polar_min_distance(contour)?)
}

/// Inference-time expansion distance: the full polar minimum distance of
/// the shrink-mask contour.
pub fn expand_offset(shrink_contour: &DenseContour) -> Result<f64> {
    polar_min_distance(shrink_contour)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn unit_square_four_per_side() {
        let c = sample_dense_contour(&QuadBox::rect(0.0, 0.0, 1.0, 1.0), 16).unwrap();
        assert_eq!(c.len(), 16);
        let top = c
            .points()
            .iter()
            .filter(|p| p.y == 0.0 && p.x < 1.0)
            .count();
        assert_eq!(top, 4);
        for p in c.points() {
            let on_edge = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
            assert!(on_edge);
        }
    }

    #[test]
    fn rectangle_spacing() {
        let c = sample_dense_contour(&QuadBox::rect(0.0, 0.0, 4.0, 2.0), 24).unwrap();
        let n = c.len();
        for i in 0..n {
            let d = c.points()[i].dist(&c.points()[(i + 1) % n]);
            assert!((d - 0.5).abs() < 1e-12, "spacing {d}");
        }
    }

    #[test]
    fn rejects_sparse_and_degenerate() {
        let sq = QuadBox::rect(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            sample_dense_contour(&sq, 15),
            Err(Error::Geometry(GeometryError::TooFewSamples))
        ));
        let flat = QuadBox::rect(0.0, 0.0, 4.0, 0.0);
        assert!(matches!(
            sample_dense_contour(&flat, 64),
            Err(Error::Geometry(GeometryError::DegeneratePolygon))
        ));
    }

    #[test]
    fn centroid_square_and_translation() {
        let c = sample_dense_contour(&QuadBox::rect(0.0, 0.0, 4.0, 4.0), 64).unwrap();
        assert_eq!(centroid(&c), Point2D::new(2.0, 2.0));
        let c = sample_dense_contour(&QuadBox::rect(10.0, 5.0, 14.0, 9.0), 64).unwrap();
        let p = centroid(&c);
        assert!((p.x - 12.0).abs() < 1e-12 && (p.y - 7.0).abs() < 1e-12);
    }

    #[test]
    fn offsets_of_reference_shapes() {
        let sq = sample_dense_contour(&QuadBox::rect(-2.0, -2.0, 2.0, 2.0), 64).unwrap();
        assert!((shrink_offset(&sq).unwrap() - 1.0).abs() < 1e-12);
        let rect = sample_dense_contour(&QuadBox::rect(0.0, 0.0, 4.0, 2.0), 24).unwrap();
        assert!((shrink_offset(&rect).unwrap() - 0.5).abs() < 1e-12);
        let small = sample_dense_contour(&QuadBox::rect(-1.0, -1.0, 1.0, 1.0), 64).unwrap();
        assert!((expand_offset(&small).unwrap() - 1.0).abs() < 1e-12);
        let thin = sample_dense_contour(&QuadBox::rect(0.0, 0.0, 3.0, 1.0), 64).unwrap();
        assert!((expand_offset(&thin).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exterior_centroid_rejected() {
        // A thin "V": its area centroid falls in the notch.
        let v = Polygon(vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 0.0),
            Point2D::new(5.0, 8.0),
            Point2D::new(9.0, 0.0),
            Point2D::new(10.0, 0.0),
            Point2D::new(5.0, 10.0),
        ]);
        let c = sample_polygon(&v, 200).unwrap();
        assert!(matches!(
            shrink_offset(&c),
            Err(Error::Geometry(GeometryError::CentroidExterior))
        ));
    }

    #[test]
    fn default_count_keeps_spacing() {
        let q = QuadBox::rect(0.0, 0.0, 300.0, 120.0);
        let n = default_sample_count(q.to_polygon().perimeter());
        assert_eq!(n, 420);
        let c = sample_dense_contour(&q, n).unwrap();
        assert!(c.within_spacing(DEFAULT_MAX_SPACING));
    }
}
