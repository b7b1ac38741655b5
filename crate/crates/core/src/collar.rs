//! Collar cleanup: morphological erosion of the clothing mask confined to
//! a rectangle anchored on the neck keypoint.
//!
//! Eroding the whole map would shrink the garment everywhere, so erosion
//! eligibility is limited to the collar rectangle; clothing outside it is
//! bit-identical before and after. Removed pixels become skin_neck when the
//! removed set borders skin, otherwise background.

use thiserror::Error;

#[cfg(feature = "rayon")]
use rayon::prelude::*;

use crate::geometry::{body25, GeometryError, Pose, VirtualSize};
use crate::segmap::{Pixel, SegMap, SemanticRole};

/// Fraction of the virtual garment size spanned by the collar rectangle.
pub const DEFAULT_RECT_FRACTION: f64 = 0.75;

/// Default erosion iteration count.
pub const DEFAULT_ITERATIONS: u32 = 2;

#[derive(Debug, Error)]
pub enum CollarError {
    #[error("map contains no clothing pixels")]
    EmptyClothing,
}

/// Axis-aligned rectangle centered on the neck keypoint. `s_x` and `s_y`
/// are full extents; the rectangle spans `center ± s/2` per axis and is
/// clipped to the map when applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarRect {
    pub center: (f64, f64),
    pub s_x: f64,
    pub s_y: f64,
}

impl CollarRect {
    pub fn x_range(&self) -> (f64, f64) {
        (self.center.0 - self.s_x / 2.0, self.center.0 + self.s_x / 2.0)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.center.1 - self.s_y / 2.0, self.center.1 + self.s_y / 2.0)
    }

    /// A pixel is inside when its center lies in the closed rectangle.
    pub fn contains(&self, p: Pixel) -> bool {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        let (x, y) = (p.x as f64, p.y as f64);
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    /// Inclusive integer pixel span of the rectangle clipped to a
    /// `width x height` raster; `None` when the clip is empty.
    fn clipped_span(&self, width: u32, height: u32) -> Option<(i32, i32, i32, i32)> {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        let x0 = (x0.ceil() as i32).max(0);
        let y0 = (y0.ceil() as i32).max(0);
        let x1 = (x1.floor() as i32).min(width as i32 - 1);
        let y1 = (y1.floor() as i32).min(height as i32 - 1);
        (x0 <= x1 && y0 <= y1).then_some((x0, x1, y0, y1))
    }
}

/// Collar rectangle with the default 3/4 proportionality constants.
pub fn collar_rect(pose: &Pose, vs: &VirtualSize) -> Result<CollarRect, GeometryError> {
    collar_rect_with(pose, vs, DEFAULT_RECT_FRACTION, DEFAULT_RECT_FRACTION)
}

/// Collar rectangle centered on the neck with extents `sx_frac * w_tilde`
/// by `sy_frac * h_tilde`.
pub fn collar_rect_with(
    pose: &Pose,
    vs: &VirtualSize,
    sx_frac: f64,
    sy_frac: f64,
) -> Result<CollarRect, GeometryError> {
    let neck = pose.detected(body25::NECK)?;
    Ok(CollarRect {
        center: (neck.x, neck.y),
        s_x: sx_frac * vs.w_tilde,
        s_y: sy_frac * vs.h_tilde,
    })
}

/// What confined erosion did to the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollarOutcome {
    /// Clothing pixels removed in total.
    pub removed: usize,
    /// Label the removed pixels were relabeled to, when any were removed.
    pub fill_label: Option<u8>,
}

/// Erodes the clothing mask with a 3x3 structuring element `iterations`
/// times, where only pixels inside `rect` are eligible for removal.
/// Off-map neighbors count as background. Dispatches on the `rayon`
/// feature; both kernels produce identical output.
pub fn erode_collar(
    map: &mut SegMap,
    rect: &CollarRect,
    iterations: u32,
) -> Result<CollarOutcome, CollarError> {
    #[cfg(feature = "rayon")]
    {
        erode_collar_par(map, rect, iterations)
    }
    #[cfg(not(feature = "rayon"))]
    {
        erode_collar_seq(map, rect, iterations)
    }
}

/// Clothing pixels in the row span `[x0, x1]` at `y` whose 3x3
/// neighborhood is not all clothing.
fn eroded_row(
    mask: &[bool],
    width: usize,
    height: usize,
    y: i32,
    x0: i32,
    x1: i32,
) -> Vec<Pixel> {
    let at = |x: i32, yy: i32| -> bool {
        if x < 0 || yy < 0 || x >= width as i32 || yy >= height as i32 {
            return false;
        }
        mask[yy as usize * width + x as usize]
    };
    (x0..=x1)
        .filter(|&x| {
            at(x, y)
                && !((-1..=1).all(|dy| (-1..=1).all(|dx| at(x + dx, y + dy))))
        })
        .map(|x| Pixel::new(x, y))
        .collect()
}

fn erode_collar_impl(
    map: &mut SegMap,
    rect: &CollarRect,
    iterations: u32,
    step: impl Fn(&[bool], usize, usize, (i32, i32, i32, i32)) -> Vec<Pixel>,
) -> Result<CollarOutcome, CollarError> {
    let clothing_labels = map.palette().labels_with_role(SemanticRole::Clothing);
    let mut mask: Vec<bool> = map
        .labels()
        .iter()
        .map(|l| clothing_labels.contains(l))
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(CollarError::EmptyClothing);
    }

    let (width, height) = (map.width() as usize, map.height() as usize);
    let Some(span) = rect.clipped_span(map.width(), map.height()) else {
        return Ok(CollarOutcome {
            removed: 0,
            fill_label: None,
        });
    };

    let mut removed_all: Vec<Pixel> = Vec::new();
    for _ in 0..iterations {
        let removed = step(&mask, width, height, span);
        if removed.is_empty() {
            break;
        }
        for &p in &removed {
            mask[p.y as usize * width + p.x as usize] = false;
        }
        removed_all.extend(removed);
    }

    if removed_all.is_empty() {
        return Ok(CollarOutcome {
            removed: 0,
            fill_label: None,
        });
    }
    let fill = map.fill_vacated(&removed_all);
    Ok(CollarOutcome {
        removed: removed_all.len(),
        fill_label: Some(fill),
    })
}

/// Sequential erosion kernel; the fallback when `rayon` is disabled, kept
/// public for the bench suite.
pub fn erode_collar_seq(
    map: &mut SegMap,
    rect: &CollarRect,
    iterations: u32,
) -> Result<CollarOutcome, CollarError> {
    erode_collar_impl(map, rect, iterations, |mask, w, h, (x0, x1, y0, y1)| {
        (y0..=y1)
            .flat_map(|y| eroded_row(mask, w, h, y, x0, x1))
            .collect()
    })
}

/// Parallel erosion kernel: each iteration scans rect rows in parallel
/// against the read-only mask and stitches removals in row order.
#[cfg(feature = "rayon")]
pub fn erode_collar_par(
    map: &mut SegMap,
    rect: &CollarRect,
    iterations: u32,
) -> Result<CollarOutcome, CollarError> {
    erode_collar_impl(map, rect, iterations, |mask, w, h, (x0, x1, y0, y1)| {
        (y0..=y1)
            .into_par_iter()
            .map(|y| eroded_row(mask, w, h, y, x0, x1))
            .flatten()
            .collect()
    })
}
