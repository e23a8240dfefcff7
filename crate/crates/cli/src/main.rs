//! `spmt`: batch front end for the segmented PMT / BOJTC detection pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{GridSpec, RunConfig};

/// Exit code 2 for configuration problems, 1 for everything that fails after.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Pipeline(String),
}

impl From<spmt_core::Error> for Failure {
    fn from(e: spmt_core::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Pipeline(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "spmt", version, about = "Shift, scale and rotation invariant multi-object detection")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Inner PMT radius in frequency pixels.
    #[arg(long, global = true)]
    r0: Option<f64>,
    /// Outer PMT radius (default: half the smaller segment side, minus one).
    #[arg(long, global = true)]
    rmax: Option<f64>,
    #[arg(long, global = true)]
    nrho: Option<usize>,
    #[arg(long, global = true)]
    ntheta: Option<usize>,
    /// Segment grid as RxC.
    #[arg(long, global = true)]
    grid: Option<GridSpec>,
    /// Match threshold on the normalized correlation peak.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Correlate through the balanced joint transform correlator.
    #[arg(long, global = true)]
    use_bojtc: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized scene placement.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with any of the above; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn run_config(&self) -> Result<RunConfig, Failure> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(file.merged(RunConfig {
            r0: self.r0,
            rmax: self.rmax,
            nrho: self.nrho,
            ntheta: self.ntheta,
            grid: self.grid,
            threshold: self.threshold,
            use_bojtc: self.use_bojtc.then_some(true),
            out: self.out.clone(),
            seed: self.seed,
        }))
    }
}

/// Where the scene and reference come from.
#[derive(Args, Clone)]
pub struct SceneArgs {
    /// Grayscale PGM or PNG scene.
    #[arg(required_unless_present = "figure3", conflicts_with = "figure3")]
    scene: Option<PathBuf>,
    /// Use the generated 4x3 test scene (square, cross, ring columns).
    #[arg(long)]
    figure3: bool,
    /// Reference object image, one segment in size.
    #[arg(long, required_unless_present = "figure3")]
    reference: Option<PathBuf>,
    /// Rotation in degrees applied to rows 2 and 4 of the generated scene.
    #[arg(long, default_value_t = spmt_core::scenegen::FIGURE3_PHI_DEG, requires = "figure3")]
    phi: f64,
    /// Scale applied to rows 3 and 4 of the generated scene.
    #[arg(long, default_value_t = spmt_core::scenegen::FIGURE3_ALPHA, requires = "figure3")]
    alpha: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Signature of a single image.
    Pmt { input: PathBuf },
    /// Per-segment signatures of a scene.
    Segment { input: PathBuf },
    /// Correlation patches of a reference against every segment.
    Correlate(SceneArgs),
    /// Match verdicts plus rotation and scale estimates per segment.
    Detect(SceneArgs),
    /// Recovered rotation and scale over a grid of ground-truth transforms.
    Sweep {
        /// Degrees as start:end:step.
        #[arg(long, default_value = "10:170:10")]
        phi_range: String,
        /// Scale factors as start:end:step.
        #[arg(long, default_value = "0.5:0.95:0.05")]
        alpha_range: String,
    },
    /// Generated scene, every intermediate and the BOJTC detection, in one directory.
    DemoFigure3 {
        #[arg(long, default_value_t = spmt_core::scenegen::FIGURE3_PHI_DEG)]
        phi: f64,
        #[arg(long, default_value_t = spmt_core::scenegen::FIGURE3_ALPHA)]
        alpha: f64,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = cli.flags.run_config()?;
    match cli.command {
        Command::Pmt { input } => commands::pmt(&cfg, &input),
        Command::Segment { input } => commands::segment(&cfg, &input),
        Command::Correlate(scene) => commands::correlate(&cfg, &scene),
        Command::Detect(scene) => commands::detect(&cfg, &scene),
        Command::Sweep { phi_range, alpha_range } => commands::sweep(&cfg, &phi_range, &alpha_range),
        Command::DemoFigure3 { phi, alpha } => commands::demo_figure3(&cfg, phi, alpha),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("spmt: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(msg)) => {
            eprintln!("spmt: {msg}");
            ExitCode::from(1)
        }
    }
}
