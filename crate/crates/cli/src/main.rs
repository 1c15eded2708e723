use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use defectscan::{
    DefectKind, EnergyMode, Region, TextureKind, DEFAULT_COVERAGE, DEFAULT_LEVELS, DEFAULT_WINDOW,
};

mod commands;

const THREADS_ENV: &str = "DEFECTSCAN_THREADS";

#[derive(Parser)]
#[command(
    name = "defectscan",
    version,
    about = "Texture defect detection from GLCM energy differences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on defect-free images.
    Train(TrainArgs),
    /// Classify the windows of an image against a model.
    Detect(DetectArgs),
    /// Score detection against a defect mask.
    Eval(EvalArgs),
    /// Generate a synthetic texture, optionally with an injected defect.
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training images or directories of PNG/PGM files.
    #[arg(long, short, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Model file to write.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long = "energy-mode", default_value_t = EnergyMode::Asm)]
    energy_mode: EnergyMode,
    /// Multiplier on the largest training distance.
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
}

/// Settings that live in the model file. Given on the command line they must
/// agree with it.
#[derive(Args, Default)]
struct ModelOverrides {
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long = "energy-mode")]
    energy_mode: Option<EnergyMode>,
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long, short)]
    model: PathBuf,
    #[arg(long)]
    image: PathBuf,
    /// Report file to write.
    #[arg(long, short)]
    report: PathBuf,
    /// Also write a PNG with defective windows highlighted.
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[command(flatten)]
    overrides: ModelOverrides,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, short)]
    model: PathBuf,
    /// Test images; paired in order with --mask.
    #[arg(long, required = true, num_args = 1..)]
    image: Vec<PathBuf>,
    /// Defect masks (0 healthy, 255 defect).
    #[arg(long, required = true, num_args = 1..)]
    mask: Vec<PathBuf>,
    /// Fraction of mask-positive pixels that makes a window defective.
    #[arg(long, default_value_t = DEFAULT_COVERAGE)]
    coverage: f64,
    #[command(flatten)]
    overrides: ModelOverrides,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = TextureKind::Stripes)]
    texture: TextureKind,
    #[arg(long, default_value_t = 8)]
    period: usize,
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Gaussian noise standard deviation in gray levels.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clean texture output (.png or .pgm).
    #[arg(long, short)]
    out: PathBuf,
    /// Defect rectangle as rect=x,y,width,height.
    #[arg(long, value_parser = parse_rect)]
    defect: Option<Region>,
    /// Defect kind applied inside the rectangle.
    #[arg(long, default_value_t = DefectKind::Rotate90)]
    kind: DefectKind,
    /// Defected image output; defaults to <out>_defect.<ext>.
    #[arg(long)]
    defect_out: Option<PathBuf>,
    /// Mask output; defaults to <out>_mask.<ext>.
    #[arg(long)]
    mask_out: Option<PathBuf>,
}

fn parse_rect(s: &str) -> Result<Region, String> {
    let body = s.strip_prefix("rect=").unwrap_or(s);
    body.parse::<Region>().map_err(|e| e.to_string())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {raw:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Detect(a) => commands::detect(a),
        Command::Eval(a) => commands::eval(a),
        Command::Synth(a) => commands::synth(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
