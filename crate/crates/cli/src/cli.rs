use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "azimodes",
    version,
    about = "Azimuthal eigenmodes of THz-optical parametric down-conversion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue table and shifted mode curves at one frequency.
    Modes(ModesArgs),
    /// Effective mode number over a frequency range and a list of gains.
    Scan(ScanArgs),
    /// Far-field intensity profile at one frequency and gain.
    Intensity(IntensityArgs),
    /// Run the oracle suite and report residuals.
    Verify(VerifyArgs),
    /// Render a CSV produced by `modes`, `intensity` or `scan` as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Chi {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<Chi> for azimodes::ChiVariant {
    fn from(c: Chi) -> Self {
        match c {
            Chi::One => azimodes::ChiVariant::Chi1,
            Chi::Two => azimodes::ChiVariant::Chi2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GainModelArg {
    Fixed,
    PumpScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Idler,
    Signal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Modes,
    Kscan,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Susceptibility variant.
    #[arg(long, value_enum, default_value = "1")]
    pub chi: Chi,
    /// Experiment configuration (JSON or `key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Idler frequency in THz.
    #[arg(long)]
    pub freq: f64,
    /// Parametric gain γ̃L; defaults to `gain_ref` from the configuration.
    #[arg(long)]
    pub gain: Option<f64>,
    /// Number of modes to tabulate and draw.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub modes: u32,
    /// Azimuthal grid size; defaults to a power of two covering the band.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also write modes.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Lowest idler frequency in THz.
    #[arg(long, default_value_t = 0.04)]
    pub freq_min: f64,
    /// Highest idler frequency in THz.
    #[arg(long, default_value_t = 2.0)]
    pub freq_max: f64,
    /// Number of frequencies, endpoints included.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    pub steps: u32,
    /// Comma-separated gains, one curve each.
    #[arg(long, default_value = "0.01", value_delimiter = ',')]
    pub gains: Vec<f64>,
    /// How the gain depends on frequency; defaults to the configuration.
    #[arg(long, value_enum)]
    pub gain_model: Option<GainModelArg>,
    /// Reference frequency of the pump-scaled model in THz.
    #[arg(long)]
    pub ref_freq: Option<f64>,
    /// Also write k_scan.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct IntensityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Idler frequency in THz.
    #[arg(long)]
    pub freq: f64,
    /// Parametric gain γ̃L; defaults to `gain_ref` from the configuration.
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long, value_enum, default_value = "idler")]
    pub side: SideArg,
    /// Number of per-mode columns.
    #[arg(long, default_value_t = 8)]
    pub modes: u32,
    /// Azimuthal grid size; defaults to a power of two covering the band.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also write intensity.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: LevelArg,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Add this amount to one coupling entry before the reconstruction check.
    #[arg(long, hide = true)]
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Output SVG.
    #[arg(long)]
    pub out: PathBuf,
}
