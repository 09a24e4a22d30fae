//! Shrink-mask geometry.
//!
//! Training labels come from shrinking each sign box by half its polar
//! minimum distance; at inference a predicted mask is traced and pushed
//! back out by the full polar minimum distance of its own contour. On a
//! rectangle the two distances coincide (both a quarter of the short
//! side), so the round trip reproduces the box.

mod components;
mod contour;
mod offset;
mod raster;

pub use components::{extract_components, label_components, DEFAULT_MIN_AREA};
pub use contour::{
    centroid, default_sample_count, expand_offset, polar_min_distance, sample_dense_contour,
    sample_polygon, shrink_offset, DenseContour, DEFAULT_MAX_SPACING, MIN_CONTOUR_POINTS,
};
pub use offset::{expand_contour, shrink_contour};
pub use raster::{
    binarize, dice_coefficient, dice_loss, rasterize, rasterize_all, rasterize_each, MaskGrid,
    ProbGrid, DEFAULT_BINARIZE_THRESHOLD,
};

use crate::error::Result;
use crate::geometry::{Polygon, QuadBox};

/// Shrunk polygon and the offset used to build it.
pub fn shrink_label(quad: &QuadBox) -> Result<(Polygon, f64)> {
    let n = default_sample_count(quad.to_polygon().perimeter());
    let d_s = shrink_offset(&sample_dense_contour(quad, n)?)?;
    Ok((shrink_contour(quad, d_s)?, d_s))
}

/// Expands one shrink-mask contour back to a sign region.
pub fn expand_shrunk(poly: &Polygon) -> Result<Polygon> {
    let n = default_sample_count(poly.perimeter());
    let d_e = expand_offset(&sample_polygon(poly, n)?)?;
    expand_contour(poly, d_e)
}

/// Traces every component of a binarized shrink-mask and expands it.
/// Components whose contour cannot be expanded are skipped with a warning.
pub fn recover_regions(mask: &MaskGrid, min_area: usize) -> Vec<Polygon> {
    extract_components(mask, min_area)
        .iter()
        .filter_map(|p| match expand_shrunk(p) {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("skipping component: {err}");
                None
            }
        })
        .collect()
}
