//! Scale clothing components to the target virtual size.
//!
//! Planning derives one pair of scale factors for the whole map; scaling
//! rasterizes each component independently about its own centroid by
//! inverse mapping (every candidate output pixel is kept iff its preimage
//! rounds into the source set), which cannot punch holes when enlarging.

use thiserror::Error;

#[cfg(feature = "rayon")]
use rayon::prelude::*;

use crate::geometry::{body25, keypoint_distance, GeometryError, Pose, VirtualSize};
use crate::segmap::{Pixel, Region, SegMap, SemanticRole};

#[derive(Debug, Error)]
pub enum ResizeError {
    #[error("degenerate clothing region: {0}")]
    DegenerateRegion(String),
    #[error("scale factor {axis} = {value} must be strictly positive and finite")]
    NonPositiveScale { axis: &'static str, value: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How the horizontal scale factor is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizontalRule {
    /// Map the person's lateral extent (shoulders plus both upper arms)
    /// onto a target extent whose shoulder span becomes the garment width:
    /// `s_h = (w_tilde + d_23 + d_56) / alpha`.
    #[default]
    LateralExtent,
    /// Compare the garment width to the shoulder span directly:
    /// `s_h = w_tilde / d_25`.
    ShoulderWidth,
}

impl HorizontalRule {
    pub fn name(self) -> &'static str {
        match self {
            HorizontalRule::LateralExtent => "alpha",
            HorizontalRule::ShoulderWidth => "shoulder",
        }
    }
}

/// Scale factors shared by all clothing components of one map, plus the
/// per-component anchors they are applied about.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePlan {
    pub s_h: f64,
    pub s_v: f64,
    /// Centroid of each clothing component, in extraction order.
    pub anchors: Vec<(f64, f64)>,
}

/// Derives the scale factors for the map's clothing.
///
/// The vertical factor compares the target height to the current vertical
/// extent of the union bbox of all clothing components (center-to-center,
/// `max_y - min_y`, matching how keypoint spans are measured). The
/// horizontal factor follows `rule`.
pub fn plan_scale(
    map: &SegMap,
    pose: &Pose,
    vs: &VirtualSize,
    rule: HorizontalRule,
) -> Result<ScalePlan, ResizeError> {
    let components = map.extract_regions(SemanticRole::Clothing);
    let union = components
        .iter()
        .map(Region::bbox)
        .reduce(|a, b| a.union(b))
        .ok_or_else(|| ResizeError::DegenerateRegion("no clothing pixels in map".into()))?;

    let current_height = union.height_extent() as f64;
    if current_height <= 0.0 {
        return Err(ResizeError::DegenerateRegion(
            "clothing has zero vertical extent".into(),
        ));
    }
    let s_v = vs.h_tilde / current_height;

    let s_h = match rule {
        HorizontalRule::LateralExtent => {
            let d_23 = keypoint_distance(pose, body25::RIGHT_SHOULDER, body25::RIGHT_ELBOW)?;
            let d_56 = keypoint_distance(pose, body25::LEFT_SHOULDER, body25::LEFT_ELBOW)?;
            (vs.w_tilde + d_23 + d_56) / vs.alpha
        }
        HorizontalRule::ShoulderWidth => {
            let d_25 = keypoint_distance(pose, body25::RIGHT_SHOULDER, body25::LEFT_SHOULDER)?;
            vs.w_tilde / d_25
        }
    };

    for (axis, value) in [("s_h", s_h), ("s_v", s_v)] {
        if value <= 0.0 || !value.is_finite() {
            return Err(ResizeError::NonPositiveScale { axis, value });
        }
    }

    Ok(ScalePlan {
        s_h,
        s_v,
        anchors: components.iter().map(Region::centroid).collect(),
    })
}

/// Scales a region about `anchor`. Dispatches to the parallel kernel when
/// the `rayon` feature is on; both kernels produce identical output.
pub fn scale_region(
    region: &Region,
    s_h: f64,
    s_v: f64,
    anchor: (f64, f64),
) -> Result<Region, ResizeError> {
    #[cfg(feature = "rayon")]
    {
        scale_region_par(region, s_h, s_v, anchor)
    }
    #[cfg(not(feature = "rayon"))]
    {
        scale_region_seq(region, s_h, s_v, anchor)
    }
}

struct ScanWindow {
    x0: i32,
    x1: i32,
    y0: i32,
    y1: i32,
}

/// Bbox-local membership grid of the source pixel set.
struct SourceGrid {
    min_x: i32,
    min_y: i32,
    width: i32,
    height: i32,
    cells: Vec<bool>,
}

impl SourceGrid {
    fn new(region: &Region) -> Self {
        let b = region.bbox();
        let width = b.width_extent() + 1;
        let height = b.height_extent() + 1;
        let mut cells = vec![false; width as usize * height as usize];
        for p in region.pixels() {
            cells[((p.y - b.min_y) * width + (p.x - b.min_x)) as usize] = true;
        }
        Self {
            min_x: b.min_x,
            min_y: b.min_y,
            width,
            height,
            cells,
        }
    }

    #[inline]
    fn contains(&self, x: i32, y: i32) -> bool {
        let (dx, dy) = (x - self.min_x, y - self.min_y);
        dx >= 0
            && dy >= 0
            && dx < self.width
            && dy < self.height
            && self.cells[(dy * self.width + dx) as usize]
    }
}

fn validate_factors(s_h: f64, s_v: f64) -> Result<(), ResizeError> {
    for (axis, value) in [("s_h", s_h), ("s_v", s_v)] {
        if value <= 0.0 || !value.is_finite() {
            return Err(ResizeError::NonPositiveScale { axis, value });
        }
    }
    Ok(())
}

/// Output-space window that certainly contains the scaled region.
fn scan_window(region: &Region, s_h: f64, s_v: f64, anchor: (f64, f64)) -> ScanWindow {
    let b = region.bbox();
    let fwd_x = |x: i32| anchor.0 + s_h * (x as f64 - anchor.0);
    let fwd_y = |y: i32| anchor.1 + s_v * (y as f64 - anchor.1);
    let (xa, xb) = (fwd_x(b.min_x), fwd_x(b.max_x));
    let (ya, yb) = (fwd_y(b.min_y), fwd_y(b.max_y));
    ScanWindow {
        x0: (xa.min(xb).floor() as i32) - 2,
        x1: (xa.max(xb).ceil() as i32) + 2,
        y0: (ya.min(yb).floor() as i32) - 2,
        y1: (ya.max(yb).ceil() as i32) + 2,
    }
}

/// One output row of the inverse-mapped rasterization. Rounds half away
/// from zero (`f64::round`), the crate-wide rasterization tie-break.
fn scaled_row(
    src: &SourceGrid,
    y: i32,
    window: &ScanWindow,
    s_h: f64,
    s_v: f64,
    anchor: (f64, f64),
) -> Vec<Pixel> {
    let source_y = (anchor.1 + (y as f64 - anchor.1) / s_v).round();
    if source_y < i32::MIN as f64 || source_y > i32::MAX as f64 {
        return Vec::new();
    }
    let source_y = source_y as i32;
    (window.x0..=window.x1)
        .filter_map(|x| {
            let source_x = (anchor.0 + (x as f64 - anchor.0) / s_h).round();
            if source_x < i32::MIN as f64 || source_x > i32::MAX as f64 {
                return None;
            }
            src.contains(source_x as i32, source_y)
                .then_some(Pixel::new(x, y))
        })
        .collect()
}

/// Sequential scaling kernel; the fallback when `rayon` is disabled, kept
/// public for the bench suite.
pub fn scale_region_seq(
    region: &Region,
    s_h: f64,
    s_v: f64,
    anchor: (f64, f64),
) -> Result<Region, ResizeError> {
    validate_factors(s_h, s_v)?;
    let src = SourceGrid::new(region);
    let window = scan_window(region, s_h, s_v, anchor);
    let pixels: Vec<Pixel> = (window.y0..=window.y1)
        .flat_map(|y| scaled_row(&src, y, &window, s_h, s_v, anchor))
        .collect();
    Region::from_pixels(region.label(), pixels)
        .ok_or_else(|| ResizeError::DegenerateRegion("empty after scaling".into()))
}

/// Parallel scaling kernel: rows are rasterized independently and stitched
/// in row order, so the result matches the sequential kernel exactly.
#[cfg(feature = "rayon")]
pub fn scale_region_par(
    region: &Region,
    s_h: f64,
    s_v: f64,
    anchor: (f64, f64),
) -> Result<Region, ResizeError> {
    validate_factors(s_h, s_v)?;
    let src = SourceGrid::new(region);
    let window = scan_window(region, s_h, s_v, anchor);
    let pixels: Vec<Pixel> = (window.y0..=window.y1)
        .into_par_iter()
        .map(|y| scaled_row(&src, y, &window, s_h, s_v, anchor))
        .flatten()
        .collect();
    Region::from_pixels(region.label(), pixels)
        .ok_or_else(|| ResizeError::DegenerateRegion("empty after scaling".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Keypoint, SizeSpec, KEYPOINT_COUNT};
    use crate::segmap::{Bounds, Palette, PaletteEntry};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::{BTreeSet, HashSet};

    fn block_region(x0: i32, y0: i32, w: i32, h: i32) -> Region {
        let pixels: Vec<Pixel> = (y0..y0 + h)
            .flat_map(|y| (x0..x0 + w).map(move |x| Pixel::new(x, y)))
            .collect();
        Region::from_pixels(4, pixels).unwrap()
    }

    fn pose_with(points: &[(usize, f64, f64)]) -> Pose {
        let mut keypoints = [Keypoint::undetected(); KEYPOINT_COUNT];
        for &(i, x, y) in points {
            keypoints[i] = Keypoint::new(x, y, 1.0);
        }
        Pose::new(keypoints).unwrap()
    }

    /// Independent rasterization oracle: for every source pixel, enumerate
    /// the output columns/rows whose preimage center falls on it (forward
    /// interval covering), instead of scanning output space.
    fn oracle_scale(region: &Region, s_h: f64, s_v: f64, anchor: (f64, f64)) -> BTreeSet<Pixel> {
        // round(v) == p (half away from zero) over an axis with scale s and
        // anchor a: v = a + (t - a)/s, so t in [a + s(p - a - 0.5), a + s(p - a + 0.5)]
        // with the boundary ownership decided by the sign of the preimage.
        let covered = |p: i32, s: f64, a: f64| -> Vec<i32> {
            let lo = a + s * (p as f64 - a - 0.5);
            let hi = a + s * (p as f64 - a + 0.5);
            let mut out = Vec::new();
            let mut t = lo.floor() as i64 - 1;
            let end = hi.ceil() as i64 + 1;
            while t <= end {
                let preimage = a + (t as f64 - a) / s;
                // Explicit half-away-from-zero rounding.
                let rounded = if preimage >= 0.0 {
                    (preimage + 0.5).floor()
                } else {
                    (preimage - 0.5).ceil()
                };
                if rounded as i64 == p as i64 {
                    out.push(t as i32);
                }
                t += 1;
            }
            out
        };
        let mut set = BTreeSet::new();
        for &p in region.pixels() {
            for y in covered(p.y, s_v, anchor.1) {
                for x in covered(p.x, s_h, anchor.0) {
                    set.insert(Pixel::new(x, y));
                }
            }
        }
        set
    }

    #[test]
    fn identity_scaling_preserves_pixels() {
        let region = block_region(3, 5, 7, 4);
        let scaled = scale_region(&region, 1.0, 1.0, region.centroid()).unwrap();
        assert_eq!(scaled.pixels(), region.pixels());
    }

    #[test]
    fn doubling_a_block_quadruples_area() {
        let region = block_region(0, 0, 4, 4);
        let scaled = scale_region(&region, 2.0, 2.0, region.centroid()).unwrap();
        // Exact count from the interval-covering oracle: every source pixel
        // owns a 2x2 output cell.
        assert_eq!(scaled.len(), 64);
        let oracle = oracle_scale(&region, 2.0, 2.0, region.centroid());
        assert_eq!(scaled.pixels().iter().copied().collect::<BTreeSet<_>>(), oracle);
        // Centroid stays on the anchor.
        let (cx, cy) = scaled.centroid();
        assert!((cx - 1.5).abs() <= 1.0 && (cy - 1.5).abs() <= 1.0);
    }

    #[test]
    fn axis_independent_scaling() {
        let region = block_region(0, 0, 5, 5);
        let scaled = scale_region(&region, 2.0, 1.0, region.centroid()).unwrap();
        let in_b = region.bbox();
        let out_b = scaled.bbox();
        assert!((out_b.width_extent() - 2 * in_b.width_extent()).abs() <= 1);
        assert!((out_b.height_extent() - in_b.height_extent()).abs() <= 1);
    }

    #[test]
    fn rejects_non_positive_factors() {
        let region = block_region(0, 0, 3, 3);
        assert!(matches!(
            scale_region(&region, 0.0, 1.0, region.centroid()),
            Err(ResizeError::NonPositiveScale { axis: "s_h", .. })
        ));
        assert!(scale_region(&region, 1.0, f64::NAN, region.centroid()).is_err());
    }

    fn plan_palette() -> Palette {
        Palette::new([
            (
                0,
                PaletteEntry {
                    role: SemanticRole::Background,
                    color: [0, 0, 0],
                },
            ),
            (
                4,
                PaletteEntry {
                    role: SemanticRole::Clothing,
                    color: [0, 128, 255],
                },
            ),
        ])
        .unwrap()
    }

    fn map_with_clothing_block(b: Bounds) -> SegMap {
        let mut map = SegMap::filled(220, 260, 0, plan_palette()).unwrap();
        let pixels: Vec<Pixel> = (b.min_y..=b.max_y)
            .flat_map(|y| (b.min_x..=b.max_x).map(move |x| Pixel::new(x, y)))
            .collect();
        map.write_region(&pixels, 4).unwrap();
        map
    }

    /// Pose aligned with a 100-wide, 150-tall clothing block at (60, 50):
    /// shoulders on the top corners, hip on the bottom row, elbows 30 px
    /// outboard.
    fn aligned_pose() -> Pose {
        pose_with(&[
            (body25::NECK, 110.0, 50.0),
            (body25::MID_HIP, 110.0, 200.0),
            (body25::RIGHT_SHOULDER, 60.0, 50.0),
            (body25::LEFT_SHOULDER, 160.0, 50.0),
            (body25::RIGHT_ELBOW, 30.0, 50.0),
            (body25::LEFT_ELBOW, 190.0, 50.0),
        ])
    }

    #[test]
    fn identity_sizing_gives_unit_factors() {
        let map = map_with_clothing_block(Bounds {
            min_x: 60,
            min_y: 50,
            max_x: 160,
            max_y: 200,
        });
        let pose = aligned_pose();
        let spec = SizeSpec::new(66.0, 47.0, 66.0, 47.0).unwrap();
        let vs = VirtualSize::compute(&spec, &pose).unwrap();
        let plan = plan_scale(&map, &pose, &vs, HorizontalRule::LateralExtent).unwrap();
        assert_relative_eq!(plan.s_v, 1.0, epsilon = 1e-12);
        assert_relative_eq!(plan.s_h, 1.0, epsilon = 1e-12);
        let shoulder = plan_scale(&map, &pose, &vs, HorizontalRule::ShoulderWidth).unwrap();
        assert_relative_eq!(shoulder.s_h, 1.0, epsilon = 1e-12);
        assert_eq!(plan.anchors.len(), 1);
        assert_eq!(plan.anchors[0], (110.0, 125.0));
    }

    #[test]
    fn doubling_target_height_doubles_s_v() {
        let map = map_with_clothing_block(Bounds {
            min_x: 60,
            min_y: 50,
            max_x: 160,
            max_y: 200,
        });
        let pose = aligned_pose();
        let spec = SizeSpec::new(66.0, 47.0, 132.0, 47.0).unwrap();
        let vs = VirtualSize::compute(&spec, &pose).unwrap();
        let plan = plan_scale(&map, &pose, &vs, HorizontalRule::LateralExtent).unwrap();
        assert_relative_eq!(plan.s_v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lateral_rule_matches_hand_computation() {
        let map = map_with_clothing_block(Bounds {
            min_x: 60,
            min_y: 50,
            max_x: 160,
            max_y: 200,
        });
        let pose = aligned_pose();
        let spec = SizeSpec::new(66.0, 47.0, 73.0, 51.0).unwrap();
        let vs = VirtualSize::compute(&spec, &pose).unwrap();
        let plan = plan_scale(&map, &pose, &vs, HorizontalRule::LateralExtent).unwrap();
        // d_25 = 100, d_23 = d_56 = 30, alpha = 160, w_tilde = 51/47*100.
        let w_tilde = 51.0 / 47.0 * 100.0;
        assert_relative_eq!(plan.s_h, (w_tilde + 60.0) / 160.0, epsilon = 1e-12);
    }

    #[test]
    fn plan_on_empty_map_is_degenerate() {
        let map = SegMap::filled(10, 10, 0, plan_palette()).unwrap();
        let pose = aligned_pose();
        let vs = VirtualSize {
            h_tilde: 100.0,
            w_tilde: 80.0,
            alpha: 160.0,
        };
        assert!(matches!(
            plan_scale(&map, &pose, &vs, HorizontalRule::LateralExtent),
            Err(ResizeError::DegenerateRegion(_))
        ));
    }

    fn arb_region() -> impl Strategy<Value = Region> {
        proptest::collection::hash_set((0i32..24, 0i32..24), 1..120)
            .prop_map(|points| {
                let pixels: Vec<Pixel> = points.into_iter().map(|(x, y)| Pixel::new(x, y)).collect();
                Region::from_pixels(4, pixels).unwrap()
            })
    }

    proptest! {
        #[test]
        fn matches_interval_covering_oracle(
            region in arb_region(),
            s_h in 0.3f64..3.0,
            s_v in 0.3f64..3.0,
        ) {
            let anchor = region.centroid();
            let scaled = scale_region(&region, s_h, s_v, anchor);
            let oracle = oracle_scale(&region, s_h, s_v, anchor);
            match scaled {
                Ok(r) => prop_assert_eq!(
                    r.pixels().iter().copied().collect::<BTreeSet<_>>(),
                    oracle
                ),
                Err(_) => prop_assert!(oracle.is_empty()),
            }
        }

        #[test]
        fn area_monotone_when_enlarging(
            region in arb_region(),
            s_h in 1.0f64..3.0,
            s_v in 1.0f64..3.0,
        ) {
            // Both factors >= 1 (the regime the pipeline enlarges in).
            let scaled = scale_region(&region, s_h, s_v, region.centroid()).unwrap();
            prop_assert!(scaled.len() >= region.len());
        }

        #[test]
        fn area_monotone_when_shrinking(
            region in arb_region(),
            s_h in 0.25f64..1.0,
            s_v in 0.25f64..1.0,
        ) {
            let anchor = region.centroid();
            // An Err means it shrank to nothing, which is trivially <=.
            if let Ok(scaled) = scale_region(&region, s_h, s_v, anchor) {
                prop_assert!(scaled.len() <= region.len());
            }
        }

        #[test]
        fn double_then_halve_stays_in_boundary_band(region in arb_region()) {
            let anchor = region.centroid();
            let doubled = scale_region(&region, 2.0, 2.0, anchor).unwrap();
            let back = scale_region(&doubled, 0.5, 0.5, anchor).unwrap();
            let original: HashSet<Pixel> = region.pixels().iter().copied().collect();
            let round_trip: HashSet<Pixel> = back.pixels().iter().copied().collect();
            let contour: Vec<Pixel> = region.contour().to_vec();
            for &p in round_trip.symmetric_difference(&original) {
                let near_boundary = contour.iter().any(|c| {
                    (c.x - p.x).abs() <= 1 && (c.y - p.y).abs() <= 1
                });
                prop_assert!(near_boundary, "{p} differs but is not near the boundary");
            }
        }
    }

    #[cfg(feature = "rayon")]
    proptest! {
        #[test]
        fn parallel_matches_sequential(
            region in arb_region(),
            s_h in 0.3f64..3.0,
            s_v in 0.3f64..3.0,
        ) {
            let anchor = region.centroid();
            let seq = scale_region_seq(&region, s_h, s_v, anchor);
            let par = scale_region_par(&region, s_h, s_v, anchor);
            match (seq, par) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.pixels(), b.pixels()),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "kernels disagree: {other:?}"),
            }
        }
    }
}
