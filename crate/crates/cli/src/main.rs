//! `sizefit`: resize the clothing region of a human-parsing segmentation
//! map to match real garment measurements.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sizefit_core::collar::{DEFAULT_ITERATIONS, DEFAULT_RECT_FRACTION};
use sizefit_core::fixture::{make_fixture, FixtureDescriptor, FixturePreset};
use sizefit_core::geometry::{SizeSpec, DEFAULT_CONFIDENCE_THRESHOLD};
use sizefit_core::pipeline::{run, CollarParams, JobConfig, RunOptions};
use sizefit_core::resize::HorizontalRule;

const EXIT_INPUT_ERROR: u8 = 2;
const EXIT_PROCESSING_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sizefit",
    version,
    about = "Resize the clothing region of a segmentation map to real garment measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the resizing pipeline on a segmentation map.
    Run(Box<RunArgs>),
    /// Generate a deterministic synthetic person (map, palette, pose).
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input segmentation map (indexed 8-bit PNG, palette index = label).
    #[arg(long)]
    segmap: PathBuf,
    /// Palette sidecar JSON mapping labels to roles and colors.
    #[arg(long)]
    palette: PathBuf,
    /// OpenPose BODY_25 JSON (people[0].pose_keypoints_2d).
    #[arg(long)]
    pose: PathBuf,
    /// Vertical extent of the person's clothing region, in cm.
    #[arg(long)]
    person_height_cm: f64,
    /// Person's shoulder width, in cm.
    #[arg(long)]
    person_shoulder_cm: f64,
    /// Garment height, in cm.
    #[arg(long)]
    cloth_height_cm: f64,
    /// Garment shoulder width, in cm.
    #[arg(long)]
    cloth_shoulder_cm: f64,
    /// Output segmentation map PNG (palette sidecar written next to it).
    #[arg(long)]
    out: PathBuf,
    /// Output run report JSON.
    #[arg(long)]
    report: PathBuf,
    /// Erosion iterations for the collar cleanup.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    collar_iterations: u32,
    /// Collar rectangle width as a fraction of the virtual garment width.
    #[arg(long, default_value_t = DEFAULT_RECT_FRACTION)]
    collar_sx_frac: f64,
    /// Collar rectangle height as a fraction of the virtual garment height.
    #[arg(long, default_value_t = DEFAULT_RECT_FRACTION)]
    collar_sy_frac: f64,
    /// Horizontal scale rule: alpha (lateral extent) or shoulder (span only).
    #[arg(long, value_enum, default_value_t = HRuleArg::Alpha)]
    h_rule: HRuleArg,
    /// Skip the collar erosion stage.
    #[arg(long)]
    skip_collar: bool,
    /// Skip the split-region overlap correction.
    #[arg(long)]
    skip_overlap: bool,
    /// Keypoint confidence above which a keypoint counts as detected.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD)]
    confidence_threshold: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum HRuleArg {
    Alpha,
    Shoulder,
}

impl From<HRuleArg> for HorizontalRule {
    fn from(arg: HRuleArg) -> Self {
        match arg {
            HRuleArg::Alpha => HorizontalRule::LateralExtent,
            HRuleArg::Shoulder => HorizontalRule::ShoulderWidth,
        }
    }
}

#[derive(Args)]
struct FixtureArgs {
    /// Which synthetic person to draw.
    #[arg(long, value_enum, default_value_t = PresetArg::Plain)]
    preset: PresetArg,
    /// Seed perturbing the body geometry deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving segmap.png, palette.json, pose.json, sizes.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Plain,
    CrossingArm,
}

impl From<PresetArg> for FixturePreset {
    fn from(arg: PresetArg) -> Self {
        match arg {
            PresetArg::Plain => FixturePreset::Plain,
            PresetArg::CrossingArm => FixturePreset::CrossingArm,
        }
    }
}

fn print_error_chain(err: &dyn std::error::Error) {
    eprintln!("error: {err}");
    let mut source = err.source();
    while let Some(cause) = source {
        eprintln!("  caused by: {cause}");
        source = cause.source();
    }
}

fn run_command(args: RunArgs) -> ExitCode {
    let spec = SizeSpec {
        person_height_cm: args.person_height_cm,
        person_shoulder_cm: args.person_shoulder_cm,
        cloth_height_cm: args.cloth_height_cm,
        cloth_shoulder_cm: args.cloth_shoulder_cm,
    };
    let config = JobConfig {
        segmap: args.segmap,
        palette: args.palette,
        pose: args.pose,
        spec,
        confidence_threshold: args.confidence_threshold,
        options: RunOptions {
            h_rule: args.h_rule.into(),
            collar: CollarParams {
                iterations: args.collar_iterations,
                sx_frac: args.collar_sx_frac,
                sy_frac: args.collar_sy_frac,
            },
            skip_collar: args.skip_collar,
            skip_overlap: args.skip_overlap,
        },
        out: args.out,
        report: args.report,
    };
    match run(&config) {
        Ok((_, report)) => {
            println!(
                "resized clothing by s_h={:.4}, s_v={:.4} ({} component{}); wrote {} and {}",
                report.scale.s_h,
                report.scale.s_v,
                report.clothing_components,
                if report.clothing_components == 1 { "" } else { "s" },
                config.out.display(),
                config.report.display(),
            );
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            print_error_chain(&err);
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn fixture_command(args: FixtureArgs) -> ExitCode {
    let descriptor = FixtureDescriptor::preset(args.preset.into());
    let fixture = match make_fixture(&descriptor, args.seed) {
        Ok(fixture) => fixture,
        Err(err) => {
            print_error_chain(&err);
            return ExitCode::from(EXIT_INPUT_ERROR);
        }
    };
    match fixture.write_to_dir(&args.out_dir) {
        Ok(()) => {
            println!(
                "wrote segmap.png, palette.json, pose.json, sizes.json to {}",
                args.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            print_error_chain(&err);
            ExitCode::from(EXIT_PROCESSING_ERROR)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run_command(*args),
        Command::Fixture(args) => fixture_command(args),
    }
}
