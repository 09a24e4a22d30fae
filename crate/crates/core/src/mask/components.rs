//! 8-connected component labelling and outer-contour tracing.
//!
//! Contours follow pixel edges ("cracks"), so a traced component
//! rasterizes back to exactly the same cells when it has no holes.

use std::collections::{HashMap, VecDeque};

use super::raster::MaskGrid;
use crate::geometry::{signed_area, Point2D, Polygon};

pub const DEFAULT_MIN_AREA: usize = 4;

/// Outer contours of the 8-connected components with at least `min_area`
/// cells, in raster order of each component's first cell.
pub fn extract_components(mask: &MaskGrid, min_area: usize) -> Vec<Polygon> {
    label_components(mask)
        .into_iter()
        .filter(|cells| cells.len() >= min_area)
        .map(|cells| trace_outer(mask, &cells))
        .collect()
}

/// Cell lists `(row, col)` per component.
pub fn label_components(mask: &MaskGrid) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = (mask.height(), mask.width());
    let mut seen = vec![false; h * w];
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if !mask.get(r, c) || seen[r * w + c] {
                continue;
            }
            let mut cells = Vec::new();
            let mut queue = VecDeque::from([(r, c)]);
            seen[r * w + c] = true;
            while let Some((y, x)) = queue.pop_front() {
                cells.push((y, x));
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                        if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                            continue;
                        }
                        let (ny, nx) = (ny as usize, nx as usize);
                        if mask.get(ny, nx) && !seen[ny * w + nx] {
                            seen[ny * w + nx] = true;
                            queue.push_back((ny, nx));
                        }
                    }
                }
            }
            out.push(cells);
        }
    }
    out
}

// Directions in screen space: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
#[derive(Clone, Copy)]
struct Crack {
    from: (usize, usize),
    to: (usize, usize),
    dir: u8,
}

fn trace_outer(mask: &MaskGrid, cells: &[(usize, usize)]) -> Polygon {
    let (h, w) = (mask.height(), mask.width());
    let set = |r: i64, c: i64| {
        r >= 0 && c >= 0 && r < h as i64 && c < w as i64 && mask.get(r as usize, c as usize)
    };
    // Each boundary crack keeps its cell on the right-hand side.
    let mut cracks = Vec::new();
    for &(r, c) in cells {
        let (ri, ci) = (r as i64, c as i64);
        if !set(ri - 1, ci) {
            cracks.push(Crack {
                from: (c, r),
                to: (c + 1, r),
                dir: 0,
            });
        }
        if !set(ri, ci + 1) {
            cracks.push(Crack {
                from: (c + 1, r),
                to: (c + 1, r + 1),
                dir: 1,
            });
        }
        if !set(ri + 1, ci) {
            cracks.push(Crack {
                from: (c + 1, r + 1),
                to: (c, r + 1),
                dir: 2,
            });
        }
        if !set(ri, ci - 1) {
            cracks.push(Crack {
                from: (c, r + 1),
                to: (c, r),
                dir: 3,
            });
        }
    }
    let mut outgoing: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, k) in cracks.iter().enumerate() {
        outgoing.entry(k.from).or_default().push(i);
    }
    let mut used = vec![false; cracks.len()];
    let mut best: Option<(f64, Vec<Point2D>)> = None;
    for start in 0..cracks.len() {
        if used[start] {
            continue;
        }
        let mut lp = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            let k = cracks[cur];
            lp.push(Point2D::new(k.from.0 as f64, k.from.1 as f64));
            // At a pinch vertex the left turn keeps diagonal neighbours on
            // the same contour.
            let next = [(k.dir + 3) % 4, k.dir, (k.dir + 1) % 4]
                .into_iter()
                .find_map(|d| {
                    outgoing
                        .get(&k.to)?
                        .iter()
                        .copied()
                        .find(|&e| !used[e] && cracks[e].dir == d)
                });
            match next {
                Some(e) => cur = e,
                None => break,
            }
        }
        let area = signed_area(&lp);
        if best.as_ref().is_none_or(|(a, _)| area > *a) {
            best = Some((area, lp));
        }
    }
    Polygon(best.map(|(_, p)| p).unwrap_or_default()).simplified()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadBox;
    use crate::mask::raster::rasterize;

    #[test]
    fn empty_mask() {
        let m = MaskGrid::new(5, 5).unwrap();
        assert!(extract_components(&m, DEFAULT_MIN_AREA).is_empty());
    }

    #[test]
    fn square_traces_to_its_outline() {
        let m = rasterize(&QuadBox::rect(2.0, 3.0, 7.0, 6.0).to_polygon(), 10, 10).unwrap();
        let polys = extract_components(&m, DEFAULT_MIN_AREA);
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].points().len(), 4);
        assert_eq!(polys[0].signed_area(), 15.0);
    }

    #[test]
    fn two_squares() {
        let mut m = rasterize(&QuadBox::rect(0.0, 0.0, 3.0, 3.0).to_polygon(), 12, 12).unwrap();
        let b = rasterize(&QuadBox::rect(6.0, 6.0, 10.0, 9.0).to_polygon(), 12, 12).unwrap();
        m = m.union(&b).unwrap();
        let polys = extract_components(&m, DEFAULT_MIN_AREA);
        assert_eq!(polys.len(), 2);
        assert_eq!(polys[0].area(), 9.0);
        assert_eq!(polys[1].area(), 12.0);
    }

    #[test]
    fn diagonal_cells_form_one_component() {
        let mut m = MaskGrid::new(4, 4).unwrap();
        for (r, c) in [(0, 0), (1, 1), (2, 2), (2, 3)] {
            m.set(r, c, true);
        }
        let polys = extract_components(&m, 1);
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].area(), 4.0);
        let back = rasterize(&polys[0], 4, 4).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn small_components_dropped() {
        let mut m = MaskGrid::new(6, 6).unwrap();
        m.set(0, 0, true);
        m.set(0, 1, true);
        assert!(extract_components(&m, DEFAULT_MIN_AREA).is_empty());
        assert_eq!(extract_components(&m, 2).len(), 1);
    }

    #[test]
    fn hole_is_filled_by_outer_contour() {
        let mut m = MaskGrid::new(5, 5).unwrap();
        for r in 1..4 {
            for c in 1..4 {
                m.set(r, c, !(r == 2 && c == 2));
            }
        }
        let polys = extract_components(&m, DEFAULT_MIN_AREA);
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].area(), 9.0);
    }
}
