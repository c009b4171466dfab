mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vpb_core::diagram::Rect;
use vpb_core::experiment::{Essential, ExperimentKind, MethodSel, Scale};
use vpb_core::metrics::Norm;

#[derive(Parser)]
#[command(name = "vpb", version, about = "Vectorized persistence blocks and the pipelines around them")]
struct Cli {
    /// Worker threads; 1 forces serial execution.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Global seed [default: 0, or the seed in `--config`].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (a directory for `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write data to stdout, also when `--out` is given.
    #[arg(long, global = true)]
    stdout: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point cloud or a random diagram.
    Gen(GenArgs),
    /// Vietoris-Rips persistence of a point cloud.
    Ph(PhArgs),
    /// Vectorized persistence blocks of diagrams, one row per input.
    Vpb(VpbArgs),
    /// Persistence images of diagrams, one row per input.
    Pi(PiArgs),
    /// Pairwise distances between feature vectors or between diagrams.
    Dist(DistArgs),
    /// K-medoids clustering of a dissimilarity matrix.
    Cluster(ClusterArgs),
    /// Retrieval statistics of a dissimilarity matrix.
    Retrieve(LabelledMatrix),
    /// Cross-validated 1-NN classification from a dissimilarity matrix.
    Classify(ClassifyArgs),
    /// E-divisive change-point detection on a feature sequence.
    Cpd(CpdArgs),
    /// Timing of VPB against PI construction.
    Bench(BenchArgs),
    /// Run a complete experiment and write its artifacts.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    BirthDeath,
    BirthPersistence,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum EssentialArg {
    Drop,
    Cap,
}

#[derive(Args)]
pub struct DiagramInput {
    /// Diagram file (CSV or .json), repeatable.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Homology dimension to read; required when a file holds several.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Third CSV column; read from the header when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Infinite deaths: drop them, or replace them by `--cap`.
    #[arg(long, value_enum, default_value = "drop")]
    pub essential: EssentialArg,
    /// Death assigned to essential classes with `--essential cap`.
    #[arg(long)]
    pub cap: Option<f64>,
}

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub what: GenWhat,
}

#[derive(Subcommand)]
pub enum GenWhat {
    /// Noisy sample of a synthetic shape.
    Shape {
        /// cube, circle, sphere, clusters3, nested-clusters or torus.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
    },
    /// Orbit of the linked twist map; the start is seeded unless given.
    Ltm {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
    },
    /// Diagram with Beta-distributed births and persistences.
    Beta {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = pair, default_value = "4,6")]
        birth: (f64, f64),
        #[arg(long, value_parser = pair, default_value = "1,5")]
        persistence: (f64, f64),
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

#[derive(Args)]
pub struct PhArgs {
    /// Point cloud CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Dimensions to compute.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub dims: Vec<usize>,
    /// Largest filtration scale.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long, value_enum, default_value = "drop")]
    pub essential: EssentialArg,
    #[arg(long, value_enum, default_value = "birth-death")]
    pub format: Format,
    /// Write JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct VpbArgs {
    #[command(flatten)]
    pub input: DiagramInput,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, value_parser = io::parse_grid, default_value = "10x10")]
    pub grid: (usize, usize),
    /// Grid region `x0,x1,y0,y1`; defaults to the region holding every square.
    #[arg(long, value_parser = io::parse_rect)]
    pub region: Option<Rect>,
    /// Domain `birth_max,pers_max`; defaults to the bounding box of the inputs.
    #[arg(long, value_parser = pair)]
    pub domain: Option<(f64, f64)>,
}

#[derive(Args)]
pub struct PiArgs {
    #[command(flatten)]
    pub input: DiagramInput,
    /// Gaussian bandwidth; the default rule when omitted.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_parser = io::parse_grid, default_value = "20x20")]
    pub grid: (usize, usize),
    #[arg(long, value_parser = io::parse_rect)]
    pub region: Option<Rect>,
    #[arg(long, value_parser = pair)]
    pub domain: Option<(f64, f64)>,
}

#[derive(Args)]
pub struct DistArgs {
    /// Feature CSV, one vector per row.
    #[arg(long, conflicts_with = "inputs")]
    pub features: Option<PathBuf>,
    #[arg(long, default_value = "l2", value_parser = parse_norm)]
    pub norm: Norm,
    /// Diagram files for Wasserstein distances, repeatable.
    #[arg(long = "in")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Wasserstein order.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Print the optimal matching of the first two diagrams as JSON.
    #[arg(long)]
    pub matching: bool,
}

#[derive(Args)]
pub struct LabelledMatrix {
    /// Dissimilarity matrix CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// One label per line, optional `label` header.
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Ground-truth labels, to report accuracy.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub data: LabelledMatrix,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Args)]
pub struct CpdArgs {
    /// Feature CSV, one observation per row in time order.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_seg: usize,
    #[arg(long, default_value_t = 199)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub sig: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// True change points, to report errors.
    #[arg(long, value_delimiter = ',')]
    pub truth: Option<Vec<usize>>,
    /// Error assigned to an unmatched true change point.
    #[arg(long, default_value_t = 50.0)]
    pub gap: f64,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,3000,4000,5000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub diagrams: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
}

#[derive(Args)]
pub struct RunArgs {
    /// Experiment; may come from `--config` instead.
    #[arg(value_parser = parse_kind)]
    pub experiment: Option<ExperimentKind>,
    /// Config or manifest JSON; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_scale)]
    pub scale: Option<Scale>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<MethodSel>,
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,
    #[arg(long)]
    pub pi_grid: Option<usize>,
    #[arg(long)]
    pub pi_sigma: Option<f64>,
    #[arg(long, value_parser = parse_norm, value_delimiter = ',')]
    pub norms: Option<Vec<Norm>>,
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<Norm>,
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub items_per_class: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub orbit_length: Option<usize>,
    #[arg(long)]
    pub steps_per_regime: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub diagrams_per_size: Option<usize>,
    #[arg(long)]
    pub mad_filter: Option<bool>,
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long, value_enum)]
    pub essential: Option<EssentialArg>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub permutations: Option<usize>,
}

impl From<EssentialArg> for Essential {
    fn from(e: EssentialArg) -> Self {
        match e {
            EssentialArg::Drop => Essential::Drop,
            EssentialArg::Cap => Essential::Cap,
        }
    }
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    match io::parse_list::<f64>(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    s.parse().map_err(|e: vpb_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: vpb_core::Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse().map_err(|e: vpb_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<MethodSel, String> {
    s.parse().map_err(|e: vpb_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let sink = io::Sink {
        out: cli.out.clone(),
        stdout: cli.stdout,
    };
    match commands::dispatch(cli.command, cli.seed, &sink) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
