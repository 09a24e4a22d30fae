use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{point_in_polygon, Bounds, Point2D, Polygon};

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;

/// Binary per-pixel mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskGrid {
    height: usize,
    width: usize,
    cells: Vec<bool>,
}

impl MaskGrid {
    pub fn new(height: usize, width: usize) -> Result<MaskGrid> {
        if height == 0 || width == 0 {
            return Err(Error::DimensionMismatch(format!(
                "mask dimensions must be positive, got {height}x{width}"
            )));
        }
        Ok(MaskGrid {
            height,
            width,
            cells: vec![false; height * width],
        })
    }

    pub fn from_cells(height: usize, width: usize, cells: Vec<bool>) -> Result<MaskGrid> {
        let mut m = MaskGrid::new(height, width)?;
        if cells.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {height}x{width} mask",
                cells.len()
            )));
        }
        m.cells = cells;
        Ok(m)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.width + col] = value;
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn union(&self, other: &MaskGrid) -> Result<MaskGrid> {
        same_dims(self, other)?;
        Ok(MaskGrid {
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| *a || *b)
                .collect(),
            ..self.clone()
        })
    }

    /// Binary PGM (`P5`, maxval 1).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n1\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|&c| c as u8));
        out
    }
}

/// Real-valued map with every cell in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGrid {
    height: usize,
    width: usize,
    cells: Vec<f64>,
}

impl ProbGrid {
    pub fn new(height: usize, width: usize, cells: Vec<f64>) -> Result<ProbGrid> {
        if height == 0 || width == 0 || cells.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {height}x{width} grid",
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation {
                field: "cells".into(),
                message: format!("probability {bad} outside [0,1]"),
            });
        }
        Ok(ProbGrid {
            height,
            width,
            cells,
        })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }
}

fn same_dims(a: &MaskGrid, b: &MaskGrid) -> Result<()> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.height, a.width, b.height, b.width
        )));
    }
    Ok(())
}

/// Sets every cell whose centre lies inside `poly` (even-odd rule, boundary
/// inclusive). Parts outside the grid are clipped away.
pub fn rasterize(poly: &Polygon, height: usize, width: usize) -> Result<MaskGrid> {
    let mut mask = MaskGrid::new(height, width)?;
    fill(&mut mask, poly);
    Ok(mask)
}

fn fill(mask: &mut MaskGrid, poly: &Polygon) {
    if poly.points().len() < 3 {
        return;
    }
    let b = Bounds::of(poly.points());
    let (h, w) = (mask.height as f64, mask.width as f64);
    // Cell (r, c) has its centre at (c + 0.5, r + 0.5).
    let c0 = (b.min_x - 0.5).ceil().clamp(0.0, w) as usize;
    let c1 = ((b.max_x - 0.5).floor() + 1.0).clamp(0.0, w) as usize;
    let r0 = (b.min_y - 0.5).ceil().clamp(0.0, h) as usize;
    let r1 = ((b.max_y - 0.5).floor() + 1.0).clamp(0.0, h) as usize;
    for r in r0..r1 {
        for c in c0..c1 {
            let center = Point2D::new(c as f64 + 0.5, r as f64 + 0.5);
            if point_in_polygon(&center, poly.points()) {
                mask.set(r, c, true);
            }
        }
    }
}

/// Rasterizes each polygon onto its own grid.
pub fn rasterize_each(
    polys: &[Polygon],
    height: usize,
    width: usize,
    exec: Exec,
) -> Result<Vec<MaskGrid>> {
    exec.map(polys, |p| rasterize(p, height, width))
        .into_iter()
        .collect()
}

/// Rasterizes the union of `polys` onto one grid.
pub fn rasterize_all(polys: &[Polygon], height: usize, width: usize) -> Result<MaskGrid> {
    let mut mask = MaskGrid::new(height, width)?;
    for p in polys {
        fill(&mut mask, p);
    }
    Ok(mask)
}

/// Cells with value `≥ threshold` are set.
pub fn binarize(grid: &ProbGrid, threshold: f64) -> Result<MaskGrid> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "binarization threshold {threshold} must lie in (0, 1)"
        )));
    }
    MaskGrid::from_cells(
        grid.height,
        grid.width,
        grid.cells.iter().map(|&v| v >= threshold).collect(),
    )
}

/// `2|A∩B| / (|A|+|B|)`, 1 when both masks are empty.
pub fn dice_coefficient(a: &MaskGrid, b: &MaskGrid) -> Result<f64> {
    same_dims(a, b)?;
    let (mut inter, mut sa, mut sb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.cells.iter().zip(&b.cells) {
        inter += (x && y) as usize;
        sa += x as usize;
        sb += y as usize;
    }
    if sa + sb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (sa + sb) as f64)
}

/// Segmentation loss built on the coefficient.
pub fn dice_loss(a: &MaskGrid, b: &MaskGrid) -> Result<f64> {
    Ok(1.0 - dice_coefficient(a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadBox;

    #[test]
    fn square_covers_sixteen_cells() {
        let m = rasterize(&QuadBox::rect(2.0, 2.0, 6.0, 6.0).to_polygon(), 10, 10).unwrap();
        assert_eq!(m.count(), 16);
        for r in 0..10 {
            for c in 0..10 {
                assert_eq!(m.get(r, c), (2..=5).contains(&r) && (2..=5).contains(&c));
            }
        }
    }

    #[test]
    fn empty_and_full() {
        assert_eq!(rasterize(&Polygon::default(), 5, 7).unwrap().count(), 0);
        let full = QuadBox::rect(0.0, 0.0, 7.0, 5.0).to_polygon();
        assert_eq!(rasterize(&full, 5, 7).unwrap().count(), 35);
        let beyond = QuadBox::rect(-10.0, -10.0, 70.0, 50.0).to_polygon();
        assert_eq!(rasterize(&beyond, 5, 7).unwrap().count(), 35);
    }

    #[test]
    fn centre_on_boundary_is_inside() {
        let m = rasterize(&QuadBox::rect(0.5, 0.5, 1.5, 1.5).to_polygon(), 3, 3).unwrap();
        assert_eq!(m.count(), 4);
    }

    #[test]
    fn binarize_convention() {
        let g = ProbGrid::new(2, 2, vec![0.9; 4]).unwrap();
        assert_eq!(binarize(&g, 0.5).unwrap().count(), 4);
        let g = ProbGrid::new(2, 2, vec![0.5; 4]).unwrap();
        assert_eq!(binarize(&g, 0.5).unwrap().count(), 4);
        assert!(binarize(&g, 1.0).is_err());
        assert!(ProbGrid::new(1, 1, vec![1.5]).is_err());
    }

    #[test]
    fn dice_reference_values() {
        let mut a = MaskGrid::new(10, 20).unwrap();
        let mut b = MaskGrid::new(10, 20).unwrap();
        for i in 0..100 {
            a.set(i / 20, i % 20, true);
            b.set((i + 50) / 20, (i + 50) % 20, true);
        }
        assert_eq!(dice_coefficient(&a, &b).unwrap(), 0.5);
        assert_eq!(dice_coefficient(&a, &a).unwrap(), 1.0);
        let empty = MaskGrid::new(10, 20).unwrap();
        assert_eq!(dice_coefficient(&empty, &empty).unwrap(), 1.0);
        assert_eq!(dice_coefficient(&a, &empty).unwrap(), 0.0);
        assert_eq!(dice_loss(&a, &b).unwrap(), 0.5);
        assert!(dice_coefficient(&a, &MaskGrid::new(20, 10).unwrap()).is_err());
    }

    #[test]
    fn pgm_header() {
        let mut m = MaskGrid::new(2, 3).unwrap();
        m.set(1, 2, true);
        let pgm = m.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 2\n1\n"));
        assert_eq!(&pgm[pgm.len() - 6..], &[0, 0, 0, 0, 0, 1]);
    }
}
