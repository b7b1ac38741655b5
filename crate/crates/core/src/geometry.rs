//! Keypoint bookkeeping and the centimeter-to-pixel garment size conversion.
//!
//! A [`Pose`] holds the 25 keypoints of the OpenPose BODY_25 convention.
//! Garment measurements in centimeters ([`SizeSpec`]) are converted into
//! pixel extents ([`VirtualSize`]) by anchoring them to keypoint distances
//! in the person image: the neck-to-hip span for the vertical axis and the
//! shoulder span for the horizontal axis. All coordinates stay continuous
//! (sub-pixel); rounding happens only at the raster-editing stage.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Confidence above which a keypoint counts as detected, unless overridden.
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.1;

/// Number of keypoints in the BODY_25 convention.
pub const KEYPOINT_COUNT: usize = 25;

/// BODY_25 keypoint indices and names.
///
/// This is the one place the index convention is spelled out; everything
/// else refers to these constants. Indices follow the OpenPose BODY_25
/// layout (0 nose, 1 neck, 2/5 shoulders, 3/6 elbows, 8 mid-hip, ...).
/// "Right"/"left" are the person's right and left, so the right arm is
/// usually on the image's left side.
pub mod body25 {
    pub const NOSE: usize = 0;
    pub const NECK: usize = 1;
    pub const RIGHT_SHOULDER: usize = 2;
    pub const RIGHT_ELBOW: usize = 3;
    pub const RIGHT_WRIST: usize = 4;
    pub const LEFT_SHOULDER: usize = 5;
    pub const LEFT_ELBOW: usize = 6;
    pub const LEFT_WRIST: usize = 7;
    pub const MID_HIP: usize = 8;

    /// Names for all 25 keypoints, by index.
    pub const NAMES: [&str; 25] = [
        "nose",
        "neck",
        "right_shoulder",
        "right_elbow",
        "right_wrist",
        "left_shoulder",
        "left_elbow",
        "left_wrist",
        "mid_hip",
        "right_hip",
        "right_knee",
        "right_ankle",
        "left_hip",
        "left_knee",
        "left_ankle",
        "right_eye",
        "left_eye",
        "right_ear",
        "left_ear",
        "left_big_toe",
        "left_small_toe",
        "left_heel",
        "right_big_toe",
        "right_small_toe",
        "right_heel",
    ];

    /// Keypoints the resizing pipeline requires to be detected.
    pub const REQUIRED: [usize; 6] = [
        NECK,
        RIGHT_SHOULDER,
        RIGHT_ELBOW,
        LEFT_SHOULDER,
        LEFT_ELBOW,
        MID_HIP,
    ];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(
        "keypoint {index} ({name}) is undetected (confidence {confidence} <= threshold {threshold})"
    )]
    UndetectedKeypoint {
        index: usize,
        name: &'static str,
        confidence: f64,
        threshold: f64,
    },
    #[error("keypoint index {index} out of range (BODY_25 has {KEYPOINT_COUNT} keypoints)")]
    IndexOutOfRange { index: usize },
    #[error("invalid size specification: {field} must be strictly positive, got {value}")]
    InvalidSpec { field: &'static str, value: f64 },
    #[error("keypoints {i} and {j} coincide; a zero span cannot anchor a pixel scale")]
    CoincidentKeypoints { i: usize, j: usize },
}

/// Errors from parsing an OpenPose JSON file.
#[derive(Debug, Error)]
pub enum PoseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("pose file contains no people")]
    NoPeople,
    #[error(
        "expected {expected} numbers in pose_keypoints_2d (x, y, confidence for {KEYPOINT_COUNT} keypoints), found {found}",
        expected = KEYPOINT_COUNT * 3
    )]
    WrongKeypointCount { found: usize },
    #[error("keypoint {index} confidence {value} outside [0, 1]")]
    ConfidenceOutOfRange { index: usize, value: f64 },
}

/// One detected (or undetected) body keypoint in image pixels.
///
/// A keypoint with confidence at or below the pose's threshold is
/// "undetected" and its coordinates must not be read; go through
/// [`Pose::detected`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    /// An undetected keypoint (confidence 0).
    pub fn undetected() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// The 25 BODY_25 keypoints of one person, plus the detection threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    keypoints: [Keypoint; KEYPOINT_COUNT],
    threshold: f64,
}

impl Pose {
    /// Builds a pose from exactly 25 keypoints, validating confidences.
    pub fn new(keypoints: [Keypoint; KEYPOINT_COUNT]) -> Result<Self, PoseError> {
        for (index, kp) in keypoints.iter().enumerate() {
            if !(0.0..=1.0).contains(&kp.confidence) || kp.confidence.is_nan() {
                return Err(PoseError::ConfidenceOutOfRange {
                    index,
                    value: kp.confidence,
                });
            }
        }
        Ok(Self {
            keypoints,
            threshold: DEFAULT_CONFIDENCE_THRESHOLD,
        })
    }

    /// Overrides the detection threshold (default 0.1).
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn keypoints(&self) -> &[Keypoint; KEYPOINT_COUNT] {
        &self.keypoints
    }

    fn checked(&self, index: usize) -> Result<&Keypoint, GeometryError> {
        self.keypoints
            .get(index)
            .ok_or(GeometryError::IndexOutOfRange { index })
    }

    pub fn is_detected(&self, index: usize) -> Result<bool, GeometryError> {
        Ok(self.checked(index)?.confidence > self.threshold)
    }

    /// Returns keypoint `index`, or an error if it is undetected.
    pub fn detected(&self, index: usize) -> Result<&Keypoint, GeometryError> {
        let kp = self.checked(index)?;
        if kp.confidence > self.threshold {
            Ok(kp)
        } else {
            Err(GeometryError::UndetectedKeypoint {
                index,
                name: body25::NAMES[index],
                confidence: kp.confidence,
                threshold: self.threshold,
            })
        }
    }

    /// Checks that every listed keypoint is detected.
    pub fn require_detected(&self, indices: &[usize]) -> Result<(), GeometryError> {
        for &index in indices {
            self.detected(index)?;
        }
        Ok(())
    }

    /// Parses the OpenPose JSON output format: an object with
    /// `people[0].pose_keypoints_2d` holding a flat array of 75 numbers
    /// (x, y, confidence for each of the 25 keypoints). Only the first
    /// person is read; files with a different keypoint count are rejected.
    pub fn from_openpose_json(json: &str) -> Result<Self, PoseError> {
        #[derive(Deserialize)]
        struct File {
            people: Vec<Person>,
        }
        #[derive(Deserialize)]
        struct Person {
            pose_keypoints_2d: Vec<f64>,
        }

        let file: File = serde_json::from_str(json)?;
        let person = file.people.first().ok_or(PoseError::NoPeople)?;
        let flat = &person.pose_keypoints_2d;
        if flat.len() != KEYPOINT_COUNT * 3 {
            return Err(PoseError::WrongKeypointCount { found: flat.len() });
        }
        let mut keypoints = [Keypoint::undetected(); KEYPOINT_COUNT];
        for (i, kp) in keypoints.iter_mut().enumerate() {
            *kp = Keypoint::new(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
        }
        Self::new(keypoints)
    }

    pub fn from_openpose_file(path: &Path) -> Result<Self, std::io::Error> {
        let json = fs::read_to_string(path)?;
        Self::from_openpose_json(&json)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Serializes back to the OpenPose JSON layout (single person).
    pub fn to_openpose_json(&self) -> String {
        let flat: Vec<f64> = self
            .keypoints
            .iter()
            .flat_map(|kp| [kp.x, kp.y, kp.confidence])
            .collect();
        let value = serde_json::json!({
            "version": 1.3,
            "people": [{ "person_id": [-1], "pose_keypoints_2d": flat }],
        });
        serde_json::to_string_pretty(&value).expect("pose serialization cannot fail")
    }
}

/// Real-world person and garment measurements in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeSpec {
    /// Vertical extent of the person's clothing region (e.g. torso length).
    pub person_height_cm: f64,
    pub person_shoulder_cm: f64,
    pub cloth_height_cm: f64,
    pub cloth_shoulder_cm: f64,
}

impl SizeSpec {
    pub fn new(
        person_height_cm: f64,
        person_shoulder_cm: f64,
        cloth_height_cm: f64,
        cloth_shoulder_cm: f64,
    ) -> Result<Self, GeometryError> {
        let spec = Self {
            person_height_cm,
            person_shoulder_cm,
            cloth_height_cm,
            cloth_shoulder_cm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let fields = [
            ("person_height_cm", self.person_height_cm),
            ("person_shoulder_cm", self.person_shoulder_cm),
            ("cloth_height_cm", self.cloth_height_cm),
            ("cloth_shoulder_cm", self.cloth_shoulder_cm),
        ];
        for (field, value) in fields {
            if value <= 0.0 || !value.is_finite() {
                return Err(GeometryError::InvalidSpec { field, value });
            }
        }
        Ok(())
    }
}

/// Garment extents converted to image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualSize {
    /// Target clothing height in pixels.
    pub h_tilde: f64,
    /// Target clothing width (shoulder span) in pixels.
    pub w_tilde: f64,
    /// Current lateral extent of the person: shoulder span plus both
    /// upper-arm lengths.
    pub alpha: f64,
}

impl VirtualSize {
    /// Derives the pixel-space garment size from the measurements and pose.
    ///
    /// Fails when a required keypoint is undetected, the spec is invalid,
    /// or the anchoring keypoints coincide (which would yield a zero size).
    pub fn compute(spec: &SizeSpec, pose: &Pose) -> Result<Self, GeometryError> {
        let h_tilde = virtual_height(spec, pose)?;
        if h_tilde <= 0.0 {
            return Err(GeometryError::CoincidentKeypoints {
                i: body25::NECK,
                j: body25::MID_HIP,
            });
        }
        let w_tilde = virtual_width(spec, pose)?;
        if w_tilde <= 0.0 {
            return Err(GeometryError::CoincidentKeypoints {
                i: body25::RIGHT_SHOULDER,
                j: body25::LEFT_SHOULDER,
            });
        }
        let alpha = lateral_extent(pose)?;
        Ok(Self {
            h_tilde,
            w_tilde,
            alpha,
        })
    }
}

/// Euclidean distance in pixels between keypoints `i` and `j`.
pub fn keypoint_distance(pose: &Pose, i: usize, j: usize) -> Result<f64, GeometryError> {
    let a = pose.detected(i)?;
    let b = pose.detected(j)?;
    Ok((a.x - b.x).hypot(a.y - b.y))
}

/// Target clothing height in pixels: the garment/person height ratio
/// applied to the neck-to-hip span.
pub fn virtual_height(spec: &SizeSpec, pose: &Pose) -> Result<f64, GeometryError> {
    spec.validate()?;
    let span = keypoint_distance(pose, body25::NECK, body25::MID_HIP)?;
    Ok(spec.cloth_height_cm / spec.person_height_cm * span)
}

/// Target clothing width in pixels: the garment/person shoulder ratio
/// applied to the shoulder span.
pub fn virtual_width(spec: &SizeSpec, pose: &Pose) -> Result<f64, GeometryError> {
    spec.validate()?;
    let span = keypoint_distance(pose, body25::RIGHT_SHOULDER, body25::LEFT_SHOULDER)?;
    Ok(spec.cloth_shoulder_cm / spec.person_shoulder_cm * span)
}

/// Lateral extent of the person in pixels: shoulder span plus both
/// shoulder-to-elbow lengths.
pub fn lateral_extent(pose: &Pose) -> Result<f64, GeometryError> {
    use body25::*;
    Ok(keypoint_distance(pose, RIGHT_SHOULDER, LEFT_SHOULDER)?
        + keypoint_distance(pose, RIGHT_SHOULDER, RIGHT_ELBOW)?
        + keypoint_distance(pose, LEFT_SHOULDER, LEFT_ELBOW)?)
}
