//! End-to-end orchestration: load inputs, derive the virtual size, scale
//! the clothing, composite, correct the split-region overlap, erode the
//! collar, and write the outputs plus a run report.
//!
//! Stage order is scale -> composite -> overlap correction -> collar
//! erosion; the collar operates on the final clothing placement. Every
//! tie-break along the way is fixed, so identical inputs produce
//! bit-identical output PNG and report.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collar::{collar_rect_with, erode_collar, CollarError, DEFAULT_ITERATIONS,
    DEFAULT_RECT_FRACTION};
use crate::geometry::{body25, GeometryError, Pose, PoseError, SizeSpec, VirtualSize,
    DEFAULT_CONFIDENCE_THRESHOLD};
use crate::overlap::{closest_pair, correct_overlap, OverlapError};
use crate::resize::{plan_scale, scale_region, HorizontalRule, ResizeError};
use crate::segmap::{Palette, Pixel, SegMap, SegMapError, SemanticRole};

/// Error raised by one of the processing stages.
#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Resize(#[from] ResizeError),
    #[error(transparent)]
    Collar(#[from] CollarError),
    #[error(transparent)]
    Overlap(#[from] OverlapError),
    #[error(transparent)]
    SegMap(#[from] SegMapError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reading {path}: {source}")]
    ReadInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pose file {path}: {source}")]
    PoseFile {
        path: PathBuf,
        #[source]
        source: PoseError,
    },
    #[error("palette file {path}: {source}")]
    PaletteFile {
        path: PathBuf,
        #[source]
        source: SegMapError,
    },
    #[error("segmentation map {path}: {source}")]
    SegMapFile {
        path: PathBuf,
        #[source]
        source: SegMapError,
    },
    #[error("invalid input: {source}")]
    InvalidInput {
        #[source]
        source: GeometryError,
    },
    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: StageError,
    },
    #[error("writing {path}: {source}")]
    WriteOutput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// True for malformed or missing inputs, false for processing and
    /// output failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            PipelineError::Stage { .. } | PipelineError::WriteOutput { .. }
        )
    }

    /// CLI exit code: 2 for input errors, 3 for processing errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            2
        } else {
            3
        }
    }
}

fn stage(name: &'static str) -> impl Fn(StageError) -> PipelineError {
    move |source| PipelineError::Stage {
        stage: name,
        source,
    }
}

fn input(source: GeometryError) -> PipelineError {
    PipelineError::InvalidInput { source }
}

/// Collar stage knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarParams {
    pub iterations: u32,
    pub sx_frac: f64,
    pub sy_frac: f64,
}

impl Default for CollarParams {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            sx_frac: DEFAULT_RECT_FRACTION,
            sy_frac: DEFAULT_RECT_FRACTION,
        }
    }
}

/// Per-run switches, independent of file locations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub h_rule: HorizontalRule,
    pub collar: CollarParams,
    pub skip_collar: bool,
    pub skip_overlap: bool,
}

/// A file-based job: where to read inputs, what to measure, where to write.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub segmap: PathBuf,
    pub palette: PathBuf,
    pub pose: PathBuf,
    pub spec: SizeSpec,
    pub confidence_threshold: f64,
    pub options: RunOptions,
    pub out: PathBuf,
    pub report: PathBuf,
}

impl JobConfig {
    pub fn new(
        segmap: impl Into<PathBuf>,
        palette: impl Into<PathBuf>,
        pose: impl Into<PathBuf>,
        spec: SizeSpec,
        out: impl Into<PathBuf>,
        report: impl Into<PathBuf>,
    ) -> Self {
        Self {
            segmap: segmap.into(),
            palette: palette.into(),
            pose: pose.into(),
            spec,
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            options: RunOptions::default(),
            out: out.into(),
            report: report.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub s_h: f64,
    pub s_v: f64,
    pub h_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_after_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_after_correction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation: Option<[i32; 2]>,
}

impl OverlapReport {
    fn skipped(reason: &str) -> Self {
        Self {
            applied: false,
            skipped_reason: Some(reason.to_string()),
            distance_before: None,
            distance_after_scale: None,
            distance_after_correction: None,
            translation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarRectReport {
    pub center: [f64; 2],
    pub s_x: f64,
    pub s_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarReport {
    pub applied: bool,
    pub iterations: u32,
    pub pixels_removed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rect: Option<CollarRectReport>,
}

/// What one run computed and did. Serializes deterministically (fixed
/// field order, sorted content).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub virtual_size: VirtualSize,
    pub scale: ScaleReport,
    pub clothing_components: usize,
    pub overlap: OverlapReport,
    pub collar: CollarReport,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("report serialization");
        json.push('\n');
        json
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Every numeric field is finite.
    pub fn is_finite(&self) -> bool {
        let opt = |v: Option<f64>| v.is_none_or(f64::is_finite);
        self.virtual_size.h_tilde.is_finite()
            && self.virtual_size.w_tilde.is_finite()
            && self.virtual_size.alpha.is_finite()
            && self.scale.s_h.is_finite()
            && self.scale.s_v.is_finite()
            && opt(self.overlap.distance_before)
            && opt(self.overlap.distance_after_scale)
            && opt(self.overlap.distance_after_correction)
            && self
                .collar
                .rect
                .as_ref()
                .is_none_or(|r| {
                    r.center.iter().all(|c| c.is_finite()) && r.s_x.is_finite() && r.s_y.is_finite()
                })
    }
}

/// Runs the pipeline on in-memory inputs. The returned map is the edited
/// copy; the input map is untouched.
pub fn run_job(
    map: &SegMap,
    pose: &Pose,
    spec: &SizeSpec,
    options: &RunOptions,
) -> Result<(SegMap, RunReport), PipelineError> {
    spec.validate().map_err(input)?;
    pose.require_detected(&body25::REQUIRED).map_err(input)?;
    let vs = VirtualSize::compute(spec, pose).map_err(input)?;

    let plan = plan_scale(map, pose, &vs, options.h_rule)
        .map_err(|e| stage("plan")(e.into()))?;
    let components = map.extract_regions(SemanticRole::Clothing);
    let component_count = components.len();

    let before_pair = if component_count == 2 && !options.skip_overlap {
        Some(
            closest_pair(&components[0], &components[1])
                .map_err(|e| stage("overlap")(e.into()))?,
        )
    } else {
        None
    };

    let mut warnings = Vec::new();

    let mut scaled = Vec::with_capacity(component_count);
    for (component, &anchor) in components.iter().zip(&plan.anchors) {
        scaled.push(
            scale_region(component, plan.s_h, plan.s_v, anchor)
                .map_err(|e| stage("scale")(e.into()))?,
        );
    }

    // Composite first so precedence is judged against the original
    // content, then fill whatever original clothing remained exposed
    // (shrinking, or growth that moved off a spot).
    let mut out = map.clone();
    let clothing = out.palette().clothing_label();
    let mut covered: HashSet<Pixel> = HashSet::new();
    for region in &scaled {
        if region.pixels().iter().any(|&p| !out.in_bounds(p)) {
            warnings.push("scaled clothing clipped to the map bounds".to_string());
        }
        let written = out
            .composite_region(region.pixels(), clothing)
            .map_err(|e| stage("composite")(e.into()))?;
        covered.extend(written);
    }
    warnings.dedup();
    let vacated: Vec<Pixel> = components
        .iter()
        .flat_map(|c| c.pixels().iter().copied())
        .filter(|p| !covered.contains(p))
        .collect();
    if !vacated.is_empty() {
        out.fill_vacated(&vacated);
    }

    let overlap_report = if options.skip_overlap {
        OverlapReport::skipped("disabled by configuration")
    } else {
        match component_count {
            2 => {
                let before = before_pair.expect("computed above for two components");
                let (_, correction) =
                    correct_overlap(&mut out, &before, (&scaled[0], &scaled[1]))
                        .map_err(|e| stage("overlap")(e.into()))?;
                if !correction.feasible {
                    warnings.push(
                        "overlap correction found no disjoint placement".to_string(),
                    );
                }
                if correction.clipped {
                    warnings.push(
                        "overlap translation clipped to the map bounds; distance checked on the clipped result"
                            .to_string(),
                    );
                }
                OverlapReport {
                    applied: true,
                    skipped_reason: None,
                    distance_before: Some(correction.distance_before),
                    distance_after_scale: correction.distance_after_scale,
                    distance_after_correction: Some(correction.distance_after_correction),
                    translation: Some([correction.translation.0, correction.translation.1]),
                }
            }
            1 => OverlapReport::skipped("single clothing component"),
            n => {
                return Err(stage("overlap")(
                    OverlapError::ComponentCountMismatch(n).into(),
                ))
            }
        }
    };

    let collar_report = if options.skip_collar {
        CollarReport {
            applied: false,
            iterations: 0,
            pixels_removed: 0,
            rect: None,
        }
    } else {
        let rect = collar_rect_with(pose, &vs, options.collar.sx_frac, options.collar.sy_frac)
            .map_err(input)?;
        let outcome = erode_collar(&mut out, &rect, options.collar.iterations)
            .map_err(|e| stage("collar")(e.into()))?;
        CollarReport {
            applied: true,
            iterations: options.collar.iterations,
            pixels_removed: outcome.removed,
            rect: Some(CollarRectReport {
                center: [rect.center.0, rect.center.1],
                s_x: rect.s_x,
                s_y: rect.s_y,
            }),
        }
    };

    let report = RunReport {
        virtual_size: vs,
        scale: ScaleReport {
            s_h: plan.s_h,
            s_v: plan.s_v,
            h_rule: options.h_rule.name().to_string(),
        },
        clothing_components: component_count,
        overlap: overlap_report,
        collar: collar_report,
        warnings,
    };
    debug_assert!(report.is_finite());
    Ok((out, report))
}

/// Path of the palette sidecar written next to the output PNG.
pub fn palette_sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("palette.json")
}

/// Runs a file-based job: loads the inputs, calls [`run_job`], writes the
/// output PNG, its palette sidecar, and the report JSON.
pub fn run(config: &JobConfig) -> Result<(SegMap, RunReport), PipelineError> {
    let read = |path: &Path| -> Result<String, PipelineError> {
        fs::read_to_string(path).map_err(|source| PipelineError::ReadInput {
            path: path.to_path_buf(),
            source,
        })
    };

    let palette =
        Palette::from_json_str(&read(&config.palette)?).map_err(|source| {
            PipelineError::PaletteFile {
                path: config.palette.clone(),
                source,
            }
        })?;

    let png_bytes = fs::read(&config.segmap).map_err(|source| PipelineError::ReadInput {
        path: config.segmap.clone(),
        source,
    })?;
    let map = SegMap::from_png_bytes(&png_bytes, palette.clone()).map_err(|source| {
        PipelineError::SegMapFile {
            path: config.segmap.clone(),
            source,
        }
    })?;

    let pose = Pose::from_openpose_json(&read(&config.pose)?)
        .map_err(|source| PipelineError::PoseFile {
            path: config.pose.clone(),
            source,
        })?
        .with_threshold(config.confidence_threshold);

    let (out_map, report) = run_job(&map, &pose, &config.spec, &config.options)?;

    let write = |path: &Path, bytes: &[u8]| -> Result<(), PipelineError> {
        fs::write(path, bytes).map_err(|source| PipelineError::WriteOutput {
            path: path.to_path_buf(),
            source,
        })
    };
    let png = out_map
        .to_png_bytes()
        .map_err(|e| stage("encode")(e.into()))?;
    write(&config.out, &png)?;
    write(
        &palette_sidecar_path(&config.out),
        palette.to_json_string().as_bytes(),
    )?;
    write(&config.report, report.to_json().as_bytes())?;
    Ok((out_map, report))
}
