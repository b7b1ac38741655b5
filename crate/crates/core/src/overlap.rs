//! Alignment of arm-separated clothing components.
//!
//! When an arm crosses the garment, the clothing mask splits in two.
//! Scaling each piece about its own centroid changes the gap between them,
//! so the smaller piece is translated until the minimum contour-to-contour
//! distance returns to its pre-scale value. Arm pixels are never touched.
//!
//! Distances compare exactly: candidates are ranked by integer squared
//! distance with the lexicographic (a.y, a.x, b.y, b.x) tie-break, so the
//! chosen pair is deterministic and identical across the sequential and
//! parallel kernels.

use std::collections::HashSet;

use thiserror::Error;

#[cfg(feature = "rayon")]
use rayon::prelude::*;

use crate::segmap::{Pixel, Region, SegMap};

#[derive(Debug, Error)]
pub enum OverlapError {
    #[error("regions overlap; the closest pair is defined only for disjoint regions")]
    OverlappingRegions,
    #[error("expected exactly 2 clothing components, found {0}")]
    ComponentCountMismatch(usize),
}

/// The contour pixel pair of two disjoint regions with minimal Euclidean
/// distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPair {
    /// Closest contour pixel on the first region.
    pub point_a: Pixel,
    /// Closest contour pixel on the second region.
    pub point_b: Pixel,
    pub distance: f64,
}

/// Fully ordered candidate: squared distance first, then the documented
/// positional tie-break.
type PairKey = (i64, i32, i32, i32, i32);

fn pair_key(a: Pixel, b: Pixel) -> PairKey {
    let dx = (a.x - b.x) as i64;
    let dy = (a.y - b.y) as i64;
    (dx * dx + dy * dy, a.y, a.x, b.y, b.x)
}

fn best_against(a: Pixel, contour_b: &[Pixel]) -> PairKey {
    contour_b
        .iter()
        .map(|&b| pair_key(a, b))
        .min()
        .expect("regions are non-empty")
}

fn pair_from_key(key: PairKey) -> ClosestPair {
    let (d2, ay, ax, by, bx) = key;
    ClosestPair {
        point_a: Pixel::new(ax, ay),
        point_b: Pixel::new(bx, by),
        distance: (d2 as f64).sqrt(),
    }
}

fn regions_intersect(a: &Region, b: &Region) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let set: HashSet<Pixel> = small.pixels().iter().copied().collect();
    large.pixels().iter().any(|p| set.contains(p))
}

/// Closest contour pixel pair between two disjoint regions. Dispatches on
/// the `rayon` feature; both kernels return the identical pair.
pub fn closest_pair(a: &Region, b: &Region) -> Result<ClosestPair, OverlapError> {
    #[cfg(feature = "rayon")]
    {
        closest_pair_par(a, b)
    }
    #[cfg(not(feature = "rayon"))]
    {
        closest_pair_seq(a, b)
    }
}

/// Sequential closest-pair scan; the fallback when `rayon` is disabled,
/// kept public for the bench suite.
pub fn closest_pair_seq(a: &Region, b: &Region) -> Result<ClosestPair, OverlapError> {
    if regions_intersect(a, b) {
        return Err(OverlapError::OverlappingRegions);
    }
    let key = a
        .contour()
        .iter()
        .map(|&pa| best_against(pa, b.contour()))
        .min()
        .expect("regions are non-empty");
    Ok(pair_from_key(key))
}

/// Parallel closest-pair scan over the first region's contour with a
/// deterministic min-reduction (total order on the pair key).
#[cfg(feature = "rayon")]
pub fn closest_pair_par(a: &Region, b: &Region) -> Result<ClosestPair, OverlapError> {
    if regions_intersect(a, b) {
        return Err(OverlapError::OverlappingRegions);
    }
    let key = a
        .contour()
        .par_iter()
        .map(|&pa| best_against(pa, b.contour()))
        .min()
        .expect("regions are non-empty");
    Ok(pair_from_key(key))
}

/// What the overlap correction did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCorrection {
    /// Integer translation applied to the smaller component.
    pub translation: (i32, i32),
    /// Pre-scale minimum distance, the restoration target.
    pub distance_before: f64,
    /// Minimum distance right after scaling; `None` when the scaled
    /// components interpenetrate.
    pub distance_after_scale: Option<f64>,
    /// Minimum distance after the correction (on the clipped result).
    pub distance_after_correction: f64,
    /// Whether the translation pushed pixels off the map.
    pub clipped: bool,
    /// False only when no disjoint placement was found (pathological).
    pub feasible: bool,
}

/// Half the rasterization tolerance: the search accepts the first
/// candidate whose restored distance is this close to the target.
const ACCEPT_PENALTY: f64 = 0.75;

/// Minimum squared contour distance; used while searching, where the
/// tie-broken pair is not needed.
fn min_d2(contour_a: &[Pixel], contour_b: &[Pixel]) -> i64 {
    contour_a
        .iter()
        .flat_map(|&a| {
            contour_b.iter().map(move |&b| {
                let dx = (a.x - b.x) as i64;
                let dy = (a.y - b.y) as i64;
                dx * dx + dy * dy
            })
        })
        .min()
        .expect("contours are non-empty")
}

/// Penalty of translating the smaller component by `delta`:
/// `|min_dist - target|`, or `None` when the translate would overlap the
/// larger component.
fn shift_penalty(
    larger: &Region,
    larger_set: &HashSet<Pixel>,
    smaller: &Region,
    delta: (i32, i32),
    target: f64,
) -> Option<f64> {
    let overlaps = smaller
        .pixels()
        .iter()
        .any(|p| larger_set.contains(&Pixel::new(p.x + delta.0, p.y + delta.1)));
    if overlaps {
        return None;
    }
    let shifted: Vec<Pixel> = smaller
        .contour()
        .iter()
        .map(|p| Pixel::new(p.x + delta.0, p.y + delta.1))
        .collect();
    let d = (min_d2(larger.contour(), &shifted) as f64).sqrt();
    Some((d - target).abs())
}

/// Restores the pre-scale closest distance between two scaled clothing
/// components by translating the smaller one (fewer pixels; ties broken by
/// leftmost, then topmost bbox corner), then rewrites the map: the smaller
/// component's clothing pixels are vacated and the translated component is
/// composited back under the palette precedence, so arms and everything
/// else above clothing stay bit-identical.
///
/// The translation is found by a deterministic line search along the
/// post-scale closest-pair axis, starting from the closed-form displacement
/// and walking outward until the restored distance is within half the
/// rasterization tolerance of `before.distance`, with a final local 2-D
/// refinement. Returns the translated (clipped) smaller component and the
/// correction summary.
pub fn correct_overlap(
    map: &mut SegMap,
    before: &ClosestPair,
    after: (&Region, &Region),
) -> Result<(Region, OverlapCorrection), OverlapError> {
    let (first, second) = after;
    let size_key = |r: &Region| (r.len(), r.bbox().min_x, r.bbox().min_y);
    let (larger, smaller) = if size_key(first) >= size_key(second) {
        (first, second)
    } else {
        (second, first)
    };

    let target = before.distance;
    let after_pair = closest_pair(larger, smaller).ok();

    // Unit direction that moves the smaller component away from the larger
    // one: along the closest-pair axis when it exists, else along the
    // centroid axis.
    let (ux, uy) = {
        let (vx, vy) = match &after_pair {
            Some(pair) => (
                (pair.point_b.x - pair.point_a.x) as f64,
                (pair.point_b.y - pair.point_a.y) as f64,
            ),
            None => {
                let (lcx, lcy) = larger.centroid();
                let (scx, scy) = smaller.centroid();
                (scx - lcx, scy - lcy)
            }
        };
        let norm = vx.hypot(vy);
        if norm > 1e-9 {
            (vx / norm, vy / norm)
        } else {
            (1.0, 0.0)
        }
    };

    let larger_set: HashSet<Pixel> = larger.pixels().iter().copied().collect();
    let expected_shift = match &after_pair {
        Some(pair) => target - pair.distance,
        None => target,
    };
    let m0 = expected_shift.round() as i64;
    let b = smaller.bbox();
    let diag = ((b.width_extent() as f64).hypot(b.height_extent() as f64)).ceil() as i64;
    let span = target.ceil() as i64 + diag + 8;

    let delta_for = |m: i64| -> (i32, i32) {
        (
            (m as f64 * ux).round() as i32,
            (m as f64 * uy).round() as i32,
        )
    };

    // Outward walk: m0, m0+1, m0-1, m0+2, ...
    let mut tried: HashSet<(i32, i32)> = HashSet::new();
    let mut best: Option<((i32, i32), f64)> = None;
    'search: for step in 0..=span {
        for m in [m0 + step, m0 - step] {
            let delta = delta_for(m);
            if !tried.insert(delta) {
                continue;
            }
            if let Some(penalty) = shift_penalty(larger, &larger_set, smaller, delta, target) {
                if best.is_none_or(|(_, p)| penalty < p) {
                    best = Some((delta, penalty));
                }
                if penalty <= ACCEPT_PENALTY {
                    break 'search;
                }
            }
        }
    }

    // Local 2-D refinement when the axis walk alone is not close enough.
    if let Some((center, penalty)) = best {
        if penalty > ACCEPT_PENALTY {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let delta = (center.0 + dx, center.1 + dy);
                    if !tried.insert(delta) {
                        continue;
                    }
                    if let Some(p) = shift_penalty(larger, &larger_set, smaller, delta, target) {
                        if best.is_none_or(|(_, bp)| p < bp) {
                            best = Some((delta, p));
                        }
                    }
                }
            }
        }
    }

    let (delta, feasible) = match best {
        Some((delta, _)) => (delta, true),
        None => ((0, 0), false),
    };

    // Rewrite the map: composite the translated component first (so
    // precedence is judged against the pre-move content), then vacate the
    // smaller component's clothing pixels the move left behind.
    let clothing = map.palette().clothing_label();
    let occupied: Vec<Pixel> = smaller
        .pixels()
        .iter()
        .copied()
        .filter(|&p| map.get(p) == Some(clothing))
        .collect();

    let translated = smaller.translated(delta.0, delta.1);
    let in_bounds: Vec<Pixel> = translated
        .pixels()
        .iter()
        .copied()
        .filter(|&p| map.in_bounds(p))
        .collect();
    let clipped = in_bounds.len() != translated.len();
    let written: HashSet<Pixel> = map
        .composite_region(&in_bounds, clothing)
        .expect("clothing label comes from the palette")
        .into_iter()
        .collect();
    let vacated: Vec<Pixel> = occupied
        .into_iter()
        .filter(|p| !written.contains(p))
        .collect();
    if !vacated.is_empty() {
        map.fill_vacated(&vacated);
    }

    let placed = Region::from_pixels(smaller.label(), in_bounds);
    let distance_after_correction = placed
        .as_ref()
        .and_then(|r| closest_pair(larger, r).ok())
        .map(|pair| pair.distance)
        .unwrap_or(0.0);

    let correction = OverlapCorrection {
        translation: delta,
        distance_before: target,
        distance_after_scale: after_pair.map(|p| p.distance),
        distance_after_correction,
        clipped,
        feasible,
    };
    let placed = placed.unwrap_or_else(|| translated.clone());
    debug_assert!(correction.distance_after_correction.is_finite());
    Ok((placed, correction))
}

/// Convenience check used by the pipeline: exactly-two clothing components.
pub fn require_two_components(count: usize) -> Result<(), OverlapError> {
    if count == 2 {
        Ok(())
    } else {
        Err(OverlapError::ComponentCountMismatch(count))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resize::scale_region;
    use crate::segmap::{Palette, PaletteEntry, SemanticRole};
    use proptest::prelude::*;

    fn region_of(points: &[(i32, i32)]) -> Region {
        Region::from_pixels(4, points.iter().map(|&(x, y)| Pixel::new(x, y)).collect()).unwrap()
    }

    fn bar(x0: i32, y0: i32, w: i32, h: i32) -> Region {
        let pixels: Vec<Pixel> = (y0..y0 + h)
            .flat_map(|y| (x0..x0 + w).map(move |x| Pixel::new(x, y)))
            .collect();
        Region::from_pixels(4, pixels).unwrap()
    }

    fn palette() -> Palette {
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
            (
                5,
                PaletteEntry {
                    role: SemanticRole::LeftArm,
                    color: [0, 255, 0],
                },
            ),
        ])
        .unwrap()
    }

    #[test]
    fn single_pixel_regions() {
        let a = region_of(&[(0, 0)]);
        let b = region_of(&[(3, 4)]);
        let pair = closest_pair(&a, &b).unwrap();
        assert_eq!(pair.distance, 5.0);
        assert_eq!(pair.point_a, Pixel::new(0, 0));
        assert_eq!(pair.point_b, Pixel::new(3, 4));
    }

    #[test]
    fn parallel_bars_meet_on_facing_edges() {
        let a = bar(0, 0, 2, 10);
        let b = bar(7, 0, 2, 10);
        let pair = closest_pair(&a, &b).unwrap();
        assert_eq!(pair.distance, 6.0);
        // Every same-row pair across the gap ties at 6; the documented
        // (a.y, a.x, b.y, b.x) tie-break picks the topmost facing pixels.
        assert_eq!(pair.point_a, Pixel::new(1, 0));
        assert_eq!(pair.point_b, Pixel::new(7, 0));
    }

    #[test]
    fn symmetric_distance() {
        let a = bar(0, 0, 3, 4);
        let b = bar(10, 5, 2, 2);
        let ab = closest_pair(&a, &b).unwrap();
        let ba = closest_pair(&b, &a).unwrap();
        assert_eq!(ab.distance, ba.distance);
    }

    #[test]
    fn overlapping_regions_rejected() {
        let a = bar(0, 0, 5, 5);
        let b = bar(4, 4, 3, 3);
        assert!(matches!(
            closest_pair(&a, &b),
            Err(OverlapError::OverlappingRegions)
        ));
    }

    /// Exhaustive all-contour-pairs oracle with the documented tie-break.
    fn oracle_pair(a: &Region, b: &Region) -> ClosestPair {
        let mut best: Option<PairKey> = None;
        for &pa in a.contour() {
            for &pb in b.contour() {
                let key = pair_key(pa, pb);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        pair_from_key(best.unwrap())
    }

    fn disjoint_blobs() -> impl Strategy<Value = (Region, Region)> {
        (
            proptest::collection::hash_set((0i32..14, 0i32..30), 1..60),
            proptest::collection::hash_set((16i32..30, 0i32..30), 1..60),
        )
            .prop_map(|(pa, pb)| {
                let a: Vec<Pixel> = pa.into_iter().map(|(x, y)| Pixel::new(x, y)).collect();
                let b: Vec<Pixel> = pb.into_iter().map(|(x, y)| Pixel::new(x, y)).collect();
                (
                    Region::from_pixels(4, a).unwrap(),
                    Region::from_pixels(4, b).unwrap(),
                )
            })
    }

    proptest! {
        #[test]
        fn matches_exhaustive_oracle((a, b) in disjoint_blobs()) {
            let pair = closest_pair(&a, &b).unwrap();
            let oracle = oracle_pair(&a, &b);
            prop_assert_eq!(pair.distance, oracle.distance);
            prop_assert_eq!(pair.point_a, oracle.point_a);
            prop_assert_eq!(pair.point_b, oracle.point_b);
        }

        #[test]
        fn contour_scan_equals_full_pixel_scan((a, b) in disjoint_blobs()) {
            // Exhaustive scan over the full pixel sets (not just contours):
            // for disjoint regions the minimum distance is the same.
            let full_d2 = a
                .pixels()
                .iter()
                .flat_map(|&pa| {
                    b.pixels().iter().map(move |&pb| {
                        let dx = (pa.x - pb.x) as i64;
                        let dy = (pa.y - pb.y) as i64;
                        dx * dx + dy * dy
                    })
                })
                .min()
                .unwrap();
            let pair = closest_pair(&a, &b).unwrap();
            prop_assert_eq!(pair.distance, (full_d2 as f64).sqrt());
        }

        #[test]
        fn distance_symmetry((a, b) in disjoint_blobs()) {
            prop_assert_eq!(
                closest_pair(&a, &b).unwrap().distance,
                closest_pair(&b, &a).unwrap().distance
            );
        }
    }

    #[cfg(feature = "rayon")]
    proptest! {
        #[test]
        fn parallel_matches_sequential((a, b) in disjoint_blobs()) {
            let seq = closest_pair_seq(&a, &b).unwrap();
            let par = closest_pair_par(&a, &b).unwrap();
            prop_assert_eq!(seq, par);
        }
    }

    /// Map holding both bars as clothing over background.
    fn map_with(regions: &[&Region]) -> SegMap {
        let mut map = SegMap::filled(64, 48, 0, palette()).unwrap();
        for r in regions {
            map.write_region(r.pixels(), 4).unwrap();
        }
        map
    }

    #[test]
    fn identity_scaling_needs_no_translation() {
        let a = bar(4, 4, 10, 20);
        let b = bar(24, 10, 4, 8);
        let before = closest_pair(&a, &b).unwrap();
        let mut map = map_with(&[&a, &b]);
        let reference = map.clone();
        let (_, correction) = correct_overlap(&mut map, &before, (&a, &b)).unwrap();
        assert_eq!(correction.translation, (0, 0));
        assert_eq!(correction.distance_after_correction, before.distance);
        assert_eq!(map, reference);
    }

    #[test]
    fn doubling_bars_restores_gap() {
        let a = bar(0, 0, 4, 20);
        let b = bar(13, 2, 4, 16); // facing gap of 10 between centers
        let before = closest_pair(&a, &b).unwrap();
        assert_eq!(before.distance, 10.0);

        let a2 = scale_region(&a, 2.0, 2.0, a.centroid()).unwrap();
        let b2 = scale_region(&b, 2.0, 2.0, b.centroid()).unwrap();
        let mut map = map_with(&[&a2, &b2]);
        let (_, correction) = correct_overlap(&mut map, &before, (&a2, &b2)).unwrap();
        assert!(
            (correction.distance_after_correction - before.distance).abs() <= 1.5,
            "restored distance {} vs target {}",
            correction.distance_after_correction,
            before.distance
        );
        assert!(correction.feasible);
    }

    #[test]
    fn colliding_scaled_bars_still_corrected() {
        let a = bar(0, 8, 4, 20);
        let b = bar(13, 10, 4, 16);
        let before = closest_pair(&a, &b).unwrap();
        let a4 = scale_region(&a, 4.0, 1.0, a.centroid()).unwrap();
        let b4 = scale_region(&b, 4.0, 1.0, b.centroid()).unwrap();
        assert!(regions_intersect(&a4, &b4), "test fixture should collide");

        let mut map = SegMap::filled(96, 48, 0, palette()).unwrap();
        map.write_region(a4.pixels(), 4).unwrap();
        map.write_region(b4.pixels(), 4).unwrap();
        let (_, correction) = correct_overlap(&mut map, &before, (&a4, &b4)).unwrap();
        assert_eq!(correction.distance_after_scale, None);
        assert!(correction.feasible);
        assert!(correction.distance_after_correction >= 0.0);
        assert!(
            (correction.distance_after_correction - before.distance).abs() <= 1.5,
            "restored distance {} vs target {}",
            correction.distance_after_correction,
            before.distance
        );
    }

    #[test]
    fn arm_pixels_survive_correction() {
        let a = bar(0, 0, 4, 20);
        let b = bar(13, 2, 4, 16);
        let before = closest_pair(&a, &b).unwrap();
        let a2 = scale_region(&a, 2.0, 2.0, a.centroid()).unwrap();
        let b2 = scale_region(&b, 2.0, 2.0, b.centroid()).unwrap();
        let mut map = map_with(&[&a2, &b2]);
        // Arm stripe between the bars.
        let arm: Vec<Pixel> = (0..48).map(|y| Pixel::new(10, y)).collect();
        map.write_region(&arm, 5).unwrap();
        let arms_before: Vec<u8> = map
            .labels()
            .iter()
            .map(|&l| if l == 5 { 1 } else { 0 })
            .collect();
        correct_overlap(&mut map, &before, (&a2, &b2)).unwrap();
        let arms_after: Vec<u8> = map
            .labels()
            .iter()
            .map(|&l| if l == 5 { 1 } else { 0 })
            .collect();
        assert_eq!(arms_before, arms_after);
    }

    #[test]
    fn smaller_component_is_the_one_moved() {
        let big = bar(4, 0, 10, 30);
        let small = bar(24, 5, 3, 6);
        let before = closest_pair(&big, &small).unwrap();
        let big2 = scale_region(&big, 1.5, 1.0, big.centroid()).unwrap();
        let small2 = scale_region(&small, 1.5, 1.0, small.centroid()).unwrap();
        let mut map = SegMap::filled(64, 48, 0, palette()).unwrap();
        map.write_region(big2.pixels(), 4).unwrap();
        map.write_region(small2.pixels(), 4).unwrap();
        // Pass in swapped order; the op must still move the smaller one.
        let (moved, correction) = correct_overlap(&mut map, &before, (&small2, &big2)).unwrap();
        assert!(moved.len() <= big2.len());
        assert_ne!(correction.translation, (0, 0));
        // The larger component's pixels are all still clothing.
        for &p in big2.pixels() {
            assert_eq!(map.get(p), Some(4));
        }
    }

    #[test]
    fn component_count_guard() {
        assert!(require_two_components(2).is_ok());
        assert!(matches!(
            require_two_components(1),
            Err(OverlapError::ComponentCountMismatch(1))
        ));
        assert!(require_two_components(3).is_err());
    }
}
