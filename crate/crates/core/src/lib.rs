//! sizefit-core: garment-size-aware editing of human-parsing segmentation
//! maps.
//!
//! Given a segmentation map of a person, their OpenPose BODY_25 keypoints,
//! and real-world measurements of the person and a garment, this crate
//! rescales only the clothing region of the map so it matches the garment's
//! size, then repairs the two artifacts the rescaling introduces: the gap at
//! the collar (confined morphological erosion) and the misalignment of
//! clothing components split by an arm (closest-pair distance restoration).
//!
//! Modules follow the processing order:
//!
//! - [`geometry`] — keypoints and the centimeter-to-pixel conversion
//! - [`segmap`] — label rasters, palettes, regions, components, contours
//! - [`resize`] — scale planning and per-region rasterized scaling
//! - [`collar`] — erosion confined to a keypoint-anchored rectangle
//! - [`overlap`] — closest-pair computation and split-region alignment
//! - [`pipeline`] — end-to-end orchestration, file I/O, run reports
//! - [`fixture`] — deterministic synthetic test people
//!
//! The raster kernels (region scaling, confined erosion, closest-pair
//! scans) run on rayon when the default `rayon` feature is enabled and fall
//! back to sequential loops otherwise; both paths produce identical output.

pub mod collar;
pub mod fixture;
pub mod geometry;
pub mod overlap;
pub mod pipeline;
pub mod resize;
pub mod segmap;

pub use geometry::{GeometryError, Keypoint, Pose, SizeSpec, VirtualSize};
pub use pipeline::{JobConfig, PipelineError, RunOptions, RunReport};
pub use segmap::{Palette, Pixel, Region, SegMap, SegMapError, SemanticRole};
