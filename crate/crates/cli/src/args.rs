use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use cswarp_core::{Border, KernelFamily, Pattern, RegistrationConfig, SupportPolicy};

#[derive(Debug, Parser)]
#[command(name = "cswarp", version, about = "Thin-plate and Wendland image warping and registration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel utilities.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Warp an image with the transformation described by a JSON config.
    Warp(WarpArgs),
    /// Register a source image onto a target image.
    Register(RegisterArgs),
    /// Generate a textured image pair related by a known warp.
    Synth(SynthArgs),
    /// Blend a warped image over a render through a mask.
    Composite(CompositeArgs),
    /// Print mean L1 and SSIM between two images as JSON.
    Metrics(MetricsArgs),
    /// Register with both kernels and report how local each warp is.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Tabulate a kernel and its derivatives as CSV.
    Profile(ProfileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Tps,
    Wendland31,
}

impl From<FamilyArg> for KernelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Tps => KernelFamily::Tps,
            FamilyArg::Wendland31 => KernelFamily::Wendland31,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BorderArg {
    Clamp,
    Zeros,
}

impl From<BorderArg> for Border {
    fn from(b: BorderArg) -> Self {
        match b {
            BorderArg::Clamp => Border::Clamp,
            BorderArg::Zeros => Border::Zeros,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    Checker,
    CheckerBlob,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Checker => Pattern::Checker,
            PatternArg::CheckerBlob => Pattern::CheckerBlob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Identity,
    Single,
    Random,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Kernel family.
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Support radius (wendland31 only).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Largest radius tabulated.
    #[arg(long)]
    pub rmax: f64,
    /// Number of rows, evenly spaced over [0, rmax].
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    /// Warp configuration (grid, frame, theta, kernel).
    pub config: PathBuf,
    /// Image to warp.
    pub input: PathBuf,
    /// Output PNG.
    pub output: PathBuf,
    /// Also write the sampling field in DFIELD format.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Handling of samples outside the source image.
    #[arg(long, value_enum, default_value_t = BorderArg::Clamp)]
    pub border: BorderArg,
}

/// Flags mirroring the registration configuration.
#[derive(Debug, Args)]
pub struct RegistrationFlags {
    /// Control grid rows.
    #[arg(long, default_value_t = 5)]
    pub rows: usize,
    /// Control grid columns.
    #[arg(long, default_value_t = 5)]
    pub cols: usize,
    /// Kernel family.
    #[arg(long, value_enum, default_value_t = FamilyArg::Wendland31)]
    pub kernel: FamilyArg,
    /// Optimize the support parameter alongside the offsets.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub optimize_alpha: bool,
    /// Initial support parameter in (0, 1).
    #[arg(long, default_value_t = 0.3)]
    pub alpha_hat_init: f64,
    /// Scale of the support parameter: alpha = lambda_alpha * alpha_hat + D.
    #[arg(long, default_value_t = SupportPolicy::DEFAULT_LAMBDA_ALPHA)]
    pub lambda_alpha: f64,
    /// Optimizer iterations per pyramid level.
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    /// Optimizer step size (normalized units).
    #[arg(long, default_value_t = 0.05)]
    pub step_size: f64,
    /// Pyramid levels.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Smoothing constant of the Charbonnier loss.
    #[arg(long, default_value_t = 1e-3)]
    pub charbonnier_eps: f64,
    /// Ridge added to the kernel matrix diagonal.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_reg: f64,
    /// Include the affine part (default: on for tps, off for wendland31).
    #[arg(long, action = ArgAction::Set)]
    pub with_affine: Option<bool>,
    /// Use normalized [-1, 1] coordinates instead of pixel coordinates.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub normalized: bool,
    /// Handling of samples outside the source image.
    #[arg(long, value_enum, default_value_t = BorderArg::Clamp)]
    pub border: BorderArg,
    /// Seed recorded with the run; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RegistrationFlags {
    pub fn config(&self) -> RegistrationConfig {
        RegistrationConfig {
            rows: self.rows,
            cols: self.cols,
            kernel: self.kernel.into(),
            optimize_alpha: self.optimize_alpha,
            alpha_hat_init: self.alpha_hat_init,
            lambda_alpha: self.lambda_alpha,
            iterations: self.iterations,
            step_size: self.step_size,
            levels: self.levels,
            charbonnier_eps: self.charbonnier_eps,
            lambda_reg: self.lambda_reg,
            with_affine: self.with_affine,
            normalized: self.normalized,
            border: self.border.into(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Image to be warped.
    pub source: PathBuf,
    /// Image to match.
    pub target: PathBuf,
    /// Directory receiving result.json, warped.png and curve.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub flags: RegistrationFlags,
}

/// Flags describing a synthetic pair.
#[derive(Debug, Args)]
pub struct SynthFlags {
    /// Image width in pixels.
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    /// Image height in pixels.
    #[arg(long, default_value_t = 96)]
    pub height: usize,
    /// Texture of the source image.
    #[arg(long, value_enum, default_value_t = PatternArg::CheckerBlob)]
    pub pattern: PatternArg,
    /// Layout of the generating offsets.
    #[arg(long, value_enum, default_value_t = PresetArg::Random)]
    pub preset: PresetArg,
    /// Offset amplitude of the random preset (normalized units).
    #[arg(long, default_value_t = 0.08)]
    pub amplitude: f64,
    /// Support parameter of the generating warp.
    #[arg(long, default_value_t = 0.3)]
    pub alpha_hat: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub synth: SynthFlags,
    /// Control grid rows.
    #[arg(long, default_value_t = 5)]
    pub rows: usize,
    /// Control grid columns.
    #[arg(long, default_value_t = 5)]
    pub cols: usize,
    /// Support scale of the generating warp.
    #[arg(long, default_value_t = SupportPolicy::DEFAULT_LAMBDA_ALPHA)]
    pub lambda_alpha: f64,
    /// Use normalized [-1, 1] coordinates instead of pixel coordinates.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub normalized: bool,
    /// Seed for the texture and the random offsets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving source.png, target.png and truth.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompositeArgs {
    /// Single-channel blending mask; white selects the warped image.
    pub mask: PathBuf,
    /// Warped image.
    pub warped: PathBuf,
    /// Render shown where the mask is black.
    pub render: PathBuf,
    /// Output PNG.
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Source image; omit together with TARGET to use a synthetic pair.
    #[arg(requires = "target")]
    pub source: Option<PathBuf>,
    /// Target image.
    pub target: Option<PathBuf>,
    /// Directory receiving report.json and the warped images.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub flags: RegistrationFlags,
    /// Synthetic pair used when no images are given; its grid, support
    /// scale, frame and seed follow the registration flags.
    #[command(flatten)]
    pub synth: SynthFlags,
}
