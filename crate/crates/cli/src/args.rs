use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "pcf", version, about = "Energies, Besov seminorms and critical curves on p.c.f. fractals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Dimensions and harmonic-structure verification.
    Info(InfoArgs),
    /// Cells of the partition Λ_m with resistance and measure.
    Partition(LevelArgs),
    /// Graph Laplacian of level m in matrix-market format, with an id map.
    Laplacian(LevelArgs),
    /// Harmonic extension of boundary values to level m.
    Extend(ExtendArgs),
    /// Effective resistances from one vertex.
    Resistance(ResistanceArgs),
    /// Λ or heat Besov norm of a function.
    BesovNorm(BesovArgs),
    /// Critical lines and the curve estimate on a 1/p grid.
    Regions(RegionsArgs),
    /// Critical curve estimate from harmonic edge sums.
    CriticalCurve(CurveArgs),
    /// Lowest Neumann eigenvalues of the lumped Laplacian.
    Spectrum(SpectrumArgs),
    /// Heat-proxy against Λ-norm ratios over a seeded family.
    Equivalence(EquivalenceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Info(_) => "info",
            Command::Partition(_) => "partition",
            Command::Laplacian(_) => "laplacian",
            Command::Extend(_) => "extend",
            Command::Resistance(_) => "resistance",
            Command::BesovNorm(_) => "besov-norm",
            Command::Regions(_) => "regions",
            Command::CriticalCurve(_) => "critical-curve",
            Command::Spectrum(_) => "spectrum",
            Command::Equivalence(_) => "equivalence",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Info(a) => &a.common,
            Command::Partition(a) | Command::Laplacian(a) => &a.common,
            Command::Extend(a) => &a.common,
            Command::Resistance(a) => &a.common,
            Command::BesovNorm(a) => &a.common,
            Command::Regions(a) => &a.common,
            Command::CriticalCurve(a) => &a.common,
            Command::Spectrum(a) => &a.common,
            Command::Equivalence(a) => &a.common,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::BesovNorm(a) => a.seed,
            Command::Regions(a) => Some(a.seed),
            Command::CriticalCurve(a) => Some(a.seed),
            Command::Equivalence(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Built-in fractal: interval, sg, vicsek or vicsek2k1:K.
    #[arg(long, conflicts_with = "descriptor", required_unless_present = "descriptor")]
    pub preset: Option<String>,
    /// JSON descriptor of a user fractal.
    #[arg(long)]
    #[serde(skip)]
    pub descriptor: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Refuse levels with more cells than this
    #[arg(long)]
    pub budget_cells: Option<usize>,
    /// Refuse levels with more vertices than this
    #[arg(long)]
    pub budget_vertices: Option<usize>,
    /// Cache root; overrides PCF_CACHE_DIR.
    #[arg(long)]
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    /// Ignore both the cache flag and PCF_CACHE_DIR
    #[arg(long)]
    #[serde(skip)]
    pub no_cache: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct InfoArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also report vertex and cell counts up to this level.
    #[arg(long, default_value_t = 3)]
    pub level: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub level: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtendArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub level: usize,
    /// Comma-separated values on the boundary vertices, in increasing order.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub boundary: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ResistanceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub level: usize,
    #[arg(long)]
    pub from: usize,
    /// Single target; all vertices of the level when absent.
    #[arg(long)]
    pub to: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BesovArgs {
    #[command(flatten)]
    pub common: Common,
    /// Level of the function and the largest level M of the seminorm.
    #[arg(long)]
    pub level: usize,
    /// Integrability exponent, `inf` allowed
    #[arg(long)]
    pub p: String,
    /// Summability exponent, `inf` allowed
    #[arg(long, default_value = "inf")]
    pub q: String,
    #[arg(long)]
    pub sigma: f64,
    /// direct, haar, graph, tent or heat.
    #[arg(long, default_value = "direct")]
    pub method: String,
    /// Vertex values as `vertex,value` lines.
    #[arg(long, conflicts_with_all = ["constant", "boundary"])]
    pub function: Option<PathBuf>,
    /// Constant function with this value
    #[arg(long, allow_negative_numbers = true, conflicts_with = "boundary")]
    pub constant: Option<f64>,
    /// Harmonic function with these boundary values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub boundary: Option<Vec<f64>>,
    /// Seed of the random tent function used when no function is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Working level of the direct method.
    #[arg(long)]
    pub working_level: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub pmin: f64,
    #[arg(long, default_value_t = 8.0)]
    pub pmax: f64,
    #[arg(long, default_value_t = 15)]
    pub pcount: usize,
    /// Top level M of the edge sums.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Points of the 1/p grid on [1/64, 1].
    #[arg(long, default_value_t = 21)]
    pub pcount: usize,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub level: usize,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "2")]
    pub q: String,
    #[arg(long)]
    pub sigma: f64,
    /// Coarse level m; ratios are taken at m and m+1.
    #[arg(long)]
    pub level: usize,
    /// Family size.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Curve value at p; estimated from edge sums when absent.
    #[arg(long)]
    pub c_estimate: Option<f64>,
    /// Run the divergence diagnostic with a near-harmonic family instead.
    #[arg(long)]
    pub divergence: bool,
    #[arg(long, default_value_t = 0.01)]
    pub perturbation: f64,
}
