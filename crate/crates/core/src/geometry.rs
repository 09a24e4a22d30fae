//! Planar primitives shared by the scene model, the mask geometry and the
//! evaluators.
//!
//! Coordinates are image pixels with `y` pointing down. With that
//! orientation a box listed clockwise on screen has a *positive* shoelace
//! area, which is the convention used throughout.

use serde::{Deserialize, Serialize};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2D { x, y }
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Point2D) -> Point2D {
        Point2D::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point2D) -> Point2D {
        Point2D::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, k: f64) -> Point2D {
        Point2D::new(self.x * k, self.y * k)
    }

    /// Rounds both coordinates to 6 decimals, the precision of the corpus
    /// format.
    pub fn quantized(&self) -> Point2D {
        Point2D::new(quantize(self.x), quantize(self.y))
    }
}

pub fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

fn cross(o: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Four-corner sign location, clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadBox {
    pub corners: [Point2D; 4],
}

impl QuadBox {
    pub fn new(corners: [Point2D; 4]) -> Self {
        QuadBox { corners }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`, starting top-left.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        QuadBox::new([
            Point2D::new(x0, y0),
            Point2D::new(x1, y0),
            Point2D::new(x1, y1),
            Point2D::new(x0, y1),
        ])
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.corners)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Mean of the four corners.
    pub fn center(&self) -> Point2D {
        let (sx, sy) = self
            .corners
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point2D::new(sx / 4.0, sy / 4.0)
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::of(&self.corners)
    }

    pub fn is_finite(&self) -> bool {
        self.corners.iter().all(Point2D::is_finite)
    }

    /// No two non-adjacent edges cross.
    pub fn is_simple(&self) -> bool {
        let c = &self.corners;
        !segments_intersect(&c[0], &c[1], &c[2], &c[3])
            && !segments_intersect(&c[1], &c[2], &c[3], &c[0])
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        point_in_polygon(p, &self.corners)
    }

    pub fn map(&self, f: impl Fn(&Point2D) -> Point2D) -> QuadBox {
        QuadBox::new([
            f(&self.corners[0]),
            f(&self.corners[1]),
            f(&self.corners[2]),
            f(&self.corners[3]),
        ])
    }

    pub fn quantized(&self) -> QuadBox {
        self.map(Point2D::quantized)
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon(self.corners.to_vec())
    }
}

/// Axis-aligned extent of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn of(points: &[Point2D]) -> Bounds {
        points.iter().fold(
            Bounds {
                min_x: f64::INFINITY,
                min_y: f64::INFINITY,
                max_x: f64::NEG_INFINITY,
                max_y: f64::NEG_INFINITY,
            },
            |b, p| Bounds {
                min_x: b.min_x.min(p.x),
                min_y: b.min_y.min(p.y),
                max_x: b.max_x.max(p.x),
                max_y: b.max_y.max(p.y),
            },
        )
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn intersects(&self, other: &Bounds) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }
}

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon(pub Vec<Point2D>);

impl Polygon {
    pub fn points(&self) -> &[Point2D] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.0)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn map(&self, f: impl Fn(&Point2D) -> Point2D) -> Polygon {
        Polygon(self.0.iter().map(f).collect())
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.0.len();
        (0..n).map(|i| self.0[i].dist(&self.0[(i + 1) % n])).sum()
    }

    /// Drops repeated and collinear vertices.
    pub fn simplified(&self) -> Polygon {
        let mut pts: Vec<Point2D> = Vec::with_capacity(self.0.len());
        for p in &self.0 {
            if pts.last().is_none_or(|q| q.dist(p) > EPS) {
                pts.push(*p);
            }
        }
        while pts.len() > 1 && pts[0].dist(pts.last().unwrap()) <= EPS {
            pts.pop();
        }
        loop {
            let n = pts.len();
            if n < 3 {
                return Polygon(pts);
            }
            let drop = (0..n).find(|&i| {
                let prev = &pts[(i + n - 1) % n];
                let next = &pts[(i + 1) % n];
                let c = cross(prev, &pts[i], next);
                let d1 = pts[i].sub(prev);
                let d2 = next.sub(&pts[i]);
                c.abs() <= EPS * (1.0 + d1.x.abs() + d1.y.abs()) && d1.x * d2.x + d1.y * d2.y > 0.0
            });
            match drop {
                Some(i) => {
                    pts.remove(i);
                }
                None => return Polygon(pts),
            }
        }
    }
}

/// Shoelace area; positive for clockwise-on-screen (y-down) order.
pub fn signed_area(points: &[Point2D]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = &points[i];
        let b = &points[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    s / 2.0
}

/// Area centroid. Falls back to the vertex mean for zero-area input.
pub fn polygon_centroid(points: &[Point2D]) -> Point2D {
    let n = points.len();
    if n == 0 {
        return Point2D::default();
    }
    // Offsetting by the first vertex keeps large pixel coordinates from
    // cancelling catastrophically.
    let o = points[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = points[i].sub(&o);
        let q = points[(i + 1) % n].sub(&o);
        let w = p.x * q.y - q.x * p.y;
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a.abs() <= EPS {
        let s = points.iter().fold(Point2D::default(), |s, p| s.add(p));
        return s.scale(1.0 / n as f64);
    }
    Point2D::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
}

/// Even-odd test; points on the boundary count as inside.
pub fn point_in_polygon(p: &Point2D, poly: &[Point2D]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(p: &Point2D, a: &Point2D, b: &Point2D) -> bool {
    let len = a.dist(b);
    let tol = EPS * (1.0 + len + a.x.abs().max(a.y.abs()));
    if cross(a, b, p).abs() > tol * len.max(1.0) {
        return false;
    }
    p.x >= a.x.min(b.x) - tol
        && p.x <= a.x.max(b.x) + tol
        && p.y >= a.y.min(b.y) - tol
        && p.y <= a.y.max(b.y) + tol
}

/// Proper or touching intersection of segments `ab` and `cd`.
pub fn segments_intersect(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

pub fn point_segment_distance(p: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    p.dist(&Point2D::new(a.x + t * ab.x, a.y + t * ab.y))
}

pub fn is_convex(points: &[Point2D]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0;
    for i in 0..n {
        let c = cross(&points[i], &points[(i + 1) % n], &points[(i + 2) % n]);
        if c.abs() <= EPS {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Monotone-chain hull, positive orientation.
pub fn convex_hull(points: &[Point2D]) -> Vec<Point2D> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2D> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2D> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Returns the polygon with positive orientation.
pub fn oriented_positive(points: &[Point2D]) -> Vec<Point2D> {
    let mut v = points.to_vec();
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

/// Sutherland-Hodgman clip of `subject` by the convex `clip`. Both must be
/// positively oriented.
pub fn clip_convex(subject: &[Point2D], clip: &[Point2D]) -> Vec<Point2D> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let cur_in = cross(&a, &b, &cur) >= 0.0;
            let prev_in = cross(&a, &b, &prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(&prev, &cur, &a, &b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(&prev, &cur, &a, &b));
            }
        }
    }
    output
}

/// Intersection of line `pq` with line `ab`; callers guarantee they cross.
pub fn line_intersection(p: &Point2D, q: &Point2D, a: &Point2D, b: &Point2D) -> Point2D {
    let r = q.sub(p);
    let s = b.sub(a);
    let denom = r.x * s.y - r.y * s.x;
    if denom.abs() <= f64::MIN_POSITIVE {
        return *q;
    }
    let t = ((a.x - p.x) * s.y - (a.y - p.y) * s.x) / denom;
    Point2D::new(p.x + t * r.x, p.y + t * r.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clockwise_on_screen_is_positive() {
        let b = QuadBox::rect(0.0, 0.0, 4.0, 2.0);
        assert_eq!(b.signed_area(), 8.0);
        assert!(b.is_simple());
        assert_eq!(b.center(), Point2D::new(2.0, 1.0));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let b = QuadBox::new([
            Point2D::new(0.0, 0.0),
            Point2D::new(4.0, 4.0),
            Point2D::new(4.0, 0.0),
            Point2D::new(0.0, 4.0),
        ]);
        assert!(!b.is_simple());
    }

    #[test]
    fn boundary_counts_as_inside() {
        let sq = QuadBox::rect(0.0, 0.0, 2.0, 2.0);
        assert!(sq.contains(&Point2D::new(0.0, 1.0)));
        assert!(sq.contains(&Point2D::new(2.0, 2.0)));
        assert!(sq.contains(&Point2D::new(1.0, 1.0)));
        assert!(!sq.contains(&Point2D::new(2.5, 1.0)));
    }

    #[test]
    fn centroid_of_triangle() {
        let t = [
            Point2D::new(0.0, 0.0),
            Point2D::new(3.0, 0.0),
            Point2D::new(0.0, 3.0),
        ];
        let c = polygon_centroid(&t);
        assert!((c.x - 1.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplify_removes_collinear() {
        let p = Polygon(vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 0.0),
            Point2D::new(2.0, 0.0),
            Point2D::new(2.0, 2.0),
            Point2D::new(0.0, 2.0),
            Point2D::new(0.0, 1.0),
        ]);
        assert_eq!(p.simplified().0.len(), 4);
    }

    #[test]
    fn clip_overlap_area() {
        let a = QuadBox::rect(0.0, 0.0, 1.0, 1.0).corners;
        let b = QuadBox::rect(0.5, 0.0, 1.5, 1.0).corners;
        let inter = clip_convex(&a, &b);
        assert!((signed_area(&inter) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 1.0),
            Point2D::new(2.0, 0.0),
            Point2D::new(2.0, 2.0),
            Point2D::new(0.0, 2.0),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((signed_area(&h) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn quantize_is_stable() {
        let v = quantize(12.3456789);
        assert_eq!(format!("{v:.6}"), "12.345679");
        assert_eq!(format!("{:.6}", quantize(-0.0000001)), "0.000000");
    }
}
