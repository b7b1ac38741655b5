//! Deterministic synthetic people for tests and demos.
//!
//! A fixture draws a torso-shaped clothing block, two arms, neck skin,
//! face, hair and lower body into a fresh map, and emits a pose whose
//! keypoints match the drawn geometry exactly: the neck and mid-hip sit on
//! the clothing's top and bottom rows, the shoulders on its top corners.
//! The crossing-arm variant runs one forearm across the torso, splitting
//! the clothing into two components. The same seed always produces
//! byte-identical output.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{body25, Keypoint, Pose, SizeSpec, KEYPOINT_COUNT};
use crate::segmap::{Palette, PaletteEntry, Pixel, SegMap, SegMapError, SemanticRole};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("inconsistent descriptor: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixturePreset {
    /// One connected clothing component, arms at the sides.
    Plain,
    /// One forearm crosses the torso, splitting the clothing in two.
    CrossingArm,
}

/// Body and garment geometry of a synthetic person. All lengths in pixels;
/// `torso_width` must be even so the shoulders land on integer corners.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureDescriptor {
    pub width: u32,
    pub height: u32,
    pub torso_width: i32,
    pub torso_height: i32,
    /// Horizontal offset from shoulder to elbow.
    pub arm_out: i32,
    /// Vertical drop from shoulder to elbow.
    pub arm_drop: i32,
    /// Brush radius of the arm strokes.
    pub arm_radius: i32,
    /// Forearm end height as a percentage of the torso height (crossing
    /// variant only).
    pub cross_percent: i32,
    pub crossing_arm: bool,
    /// When set, the seed perturbs the body geometry within safe ranges.
    pub jitter: bool,
    /// Measurements reported alongside the fixture (identity by default).
    pub size: SizeSpec,
}

impl FixtureDescriptor {
    pub fn preset(preset: FixturePreset) -> Self {
        Self {
            width: 224,
            height: 288,
            torso_width: 96,
            torso_height: 140,
            arm_out: 26,
            arm_drop: 44,
            arm_radius: 5,
            cross_percent: 80,
            crossing_arm: preset == FixturePreset::CrossingArm,
            jitter: true,
            size: SizeSpec {
                person_height_cm: 66.0,
                person_shoulder_cm: 47.0,
                cloth_height_cm: 66.0,
                cloth_shoulder_cm: 47.0,
            },
        }
    }
}

/// A generated synthetic person: map, matching pose, and measurements.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub map: SegMap,
    pub pose: Pose,
    pub spec: SizeSpec,
    /// The descriptor after jitter was applied.
    pub resolved: FixtureDescriptor,
}

impl Fixture {
    /// Writes `segmap.png`, `palette.json`, `pose.json` and `sizes.json`
    /// into `dir` (created if missing).
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SegMapError> {
        std::fs::create_dir_all(dir)?;
        self.map.save_png(&dir.join("segmap.png"))?;
        self.map.palette().save(&dir.join("palette.json"))?;
        std::fs::write(dir.join("pose.json"), self.pose.to_openpose_json())?;
        let mut sizes = serde_json::to_string_pretty(&self.spec)?;
        sizes.push('\n');
        std::fs::write(dir.join("sizes.json"), sizes)?;
        Ok(())
    }
}

/// Label ids used by fixture maps.
pub mod labels {
    pub const BACKGROUND: u8 = 0;
    pub const HAIR: u8 = 1;
    pub const FACE: u8 = 2;
    pub const SKIN_NECK: u8 = 3;
    pub const CLOTHING: u8 = 4;
    pub const LEFT_ARM: u8 = 5;
    pub const RIGHT_ARM: u8 = 6;
    pub const LOWER_BODY: u8 = 7;
}

/// The palette fixtures are drawn with.
pub fn default_palette() -> Palette {
    use labels::*;
    Palette::new([
        (
            BACKGROUND,
            PaletteEntry {
                role: SemanticRole::Background,
                color: [0, 0, 0],
            },
        ),
        (
            HAIR,
            PaletteEntry {
                role: SemanticRole::Hair,
                color: [90, 20, 120],
            },
        ),
        (
            FACE,
            PaletteEntry {
                role: SemanticRole::Face,
                color: [255, 204, 153],
            },
        ),
        (
            SKIN_NECK,
            PaletteEntry {
                role: SemanticRole::SkinNeck,
                color: [255, 178, 102],
            },
        ),
        (
            CLOTHING,
            PaletteEntry {
                role: SemanticRole::Clothing,
                color: [0, 128, 255],
            },
        ),
        (
            LEFT_ARM,
            PaletteEntry {
                role: SemanticRole::LeftArm,
                color: [0, 255, 0],
            },
        ),
        (
            RIGHT_ARM,
            PaletteEntry {
                role: SemanticRole::RightArm,
                color: [0, 180, 60],
            },
        ),
        (
            LOWER_BODY,
            PaletteEntry {
                role: SemanticRole::LowerBody,
                color: [128, 128, 128],
            },
        ),
    ])
    .expect("fixture palette is valid")
}

fn rect(x0: i32, y0: i32, x1: i32, y1: i32) -> Vec<Pixel> {
    (y0..=y1)
        .flat_map(move |y| (x0..=x1).map(move |x| Pixel::new(x, y)))
        .collect()
}

/// Dense brush stroke from `from` to `to` with a disc of radius `r`.
fn thick_line(from: (i32, i32), to: (i32, i32), r: i32) -> Vec<Pixel> {
    let steps = ((to.0 - from.0).abs().max((to.1 - from.1).abs()) * 2).max(1);
    let mut set = BTreeSet::new();
    for step in 0..=steps {
        let t = step as f64 / steps as f64;
        let cx = (from.0 as f64 + t * (to.0 - from.0) as f64).round() as i32;
        let cy = (from.1 as f64 + t * (to.1 - from.1) as f64).round() as i32;
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    set.insert(Pixel::new(cx + dx, cy + dy));
                }
            }
        }
    }
    set.into_iter().collect()
}

fn jittered(desc: &FixtureDescriptor, seed: u64) -> FixtureDescriptor {
    if !desc.jitter {
        return desc.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = desc.clone();
    out.torso_width = 2 * rng.random_range(44..=52);
    out.torso_height = rng.random_range(128..=152);
    out.arm_out = rng.random_range(22..=30);
    out.arm_drop = rng.random_range(38..=50);
    out.arm_radius = rng.random_range(4..=6);
    out.cross_percent = rng.random_range(76..=84);
    out
}

fn validate(desc: &FixtureDescriptor) -> Result<(), FixtureError> {
    let fail = |msg: String| Err(FixtureError::Inconsistent(msg));
    if desc.torso_width % 2 != 0 {
        return fail(format!("torso_width {} must be even", desc.torso_width));
    }
    if desc.torso_width < 16 || desc.torso_height < 24 {
        return fail("torso too small to draw a person".into());
    }
    if desc.arm_radius < 1 || (desc.crossing_arm && desc.arm_radius < 2) {
        return fail(format!(
            "arm_radius {} too thin (crossing arms need >= 2)",
            desc.arm_radius
        ));
    }
    if desc.arm_out < 1 || desc.arm_drop < 1 {
        return fail("arms must reach outward and downward from the shoulders".into());
    }
    if !(50..=95).contains(&desc.cross_percent) {
        return fail(format!(
            "cross_percent {} must keep the forearm inside the torso",
            desc.cross_percent
        ));
    }
    desc.size
        .validate()
        .map_err(|e| FixtureError::Inconsistent(e.to_string()))?;
    let cx = desc.width as i32 / 2;
    let reach = desc.torso_width / 2 + desc.arm_out + desc.arm_radius + 2;
    if cx - reach < 0 || cx + reach >= desc.width as i32 {
        return fail("arms leave the canvas; widen it or shorten the arms".into());
    }
    let body_bottom = 16 + 28 + 10 + desc.torso_height + 40;
    if body_bottom >= desc.height as i32 - 2 {
        return fail("body leaves the canvas; increase the height".into());
    }
    Ok(())
}

/// Builds the synthetic person for `desc`, jittered by `seed`.
pub fn make_fixture(desc: &FixtureDescriptor, seed: u64) -> Result<Fixture, FixtureError> {
    let resolved = jittered(desc, seed);
    validate(&resolved)?;
    let d = &resolved;

    let cx = d.width as i32 / 2;
    let face_top = 16;
    let face_h = 28;
    let neck_h = 10;
    let neck_y = face_top + face_h + neck_h;
    let hip_y = neck_y + d.torso_height;
    let half = d.torso_width / 2;

    let mut map = SegMap::filled(d.width, d.height, labels::BACKGROUND, default_palette())
        .expect("fixture canvas");
    let mut draw = |pixels: &[Pixel], label: u8| {
        map.write_region(pixels, label).expect("fixture label");
    };

    // Increasing palette precedence: lower body, clothing, arms, skin,
    // face, hair.
    draw(
        &rect(cx - half + 6, hip_y + 1, cx + half - 6, hip_y + 40),
        labels::LOWER_BODY,
    );
    draw(&rect(cx - half, neck_y, cx + half, hip_y), labels::CLOTHING);

    let r_shoulder = (cx - half, neck_y);
    let l_shoulder = (cx + half, neck_y);
    let r_elbow = (cx - half - d.arm_out, neck_y + d.arm_drop);
    let l_elbow = (cx + half + d.arm_out, neck_y + d.arm_drop);
    draw(&thick_line(r_shoulder, r_elbow, d.arm_radius), labels::RIGHT_ARM);
    draw(&thick_line(l_shoulder, l_elbow, d.arm_radius), labels::LEFT_ARM);
    if d.crossing_arm {
        // The person's right forearm sweeps across the torso and past its
        // far edge, cutting the clothing in two.
        let cross_end = (
            cx + half + 6,
            neck_y + d.torso_height * d.cross_percent / 100,
        );
        draw(&thick_line(r_elbow, cross_end, d.arm_radius), labels::RIGHT_ARM);
    } else {
        // Forearms hang straight down.
        let r_wrist = (r_elbow.0 - 2, r_elbow.1 + 40);
        let l_wrist = (l_elbow.0 + 2, l_elbow.1 + 40);
        draw(&thick_line(r_elbow, r_wrist, d.arm_radius), labels::RIGHT_ARM);
        draw(&thick_line(l_elbow, l_wrist, d.arm_radius), labels::LEFT_ARM);
    }

    draw(
        &rect(cx - 6, face_top + face_h, cx + 6, neck_y - 1),
        labels::SKIN_NECK,
    );
    draw(
        &rect(cx - 14, face_top, cx + 14, face_top + face_h - 1),
        labels::FACE,
    );
    draw(&rect(cx - 16, face_top - 8, cx + 16, face_top - 1), labels::HAIR);

    let mut keypoints = [Keypoint::undetected(); KEYPOINT_COUNT];
    let mut place = |index: usize, (x, y): (i32, i32)| {
        keypoints[index] = Keypoint::new(x as f64, y as f64, 1.0);
    };
    place(body25::NOSE, (cx, face_top + face_h / 2));
    place(body25::NECK, (cx, neck_y));
    place(body25::RIGHT_SHOULDER, r_shoulder);
    place(body25::RIGHT_ELBOW, r_elbow);
    place(body25::LEFT_SHOULDER, l_shoulder);
    place(body25::LEFT_ELBOW, l_elbow);
    place(body25::MID_HIP, (cx, hip_y));
    let pose = Pose::new(keypoints).expect("fixture confidences are valid");

    let components = map.extract_regions(SemanticRole::Clothing).len();
    let expected = if d.crossing_arm { 2 } else { 1 };
    if components != expected {
        return Err(FixtureError::Inconsistent(format!(
            "drawn clothing has {components} components, expected {expected}"
        )));
    }

    let spec = d.size;
    Ok(Fixture {
        map,
        pose,
        spec,
        resolved,
    })
}
