use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use seriation::milp::Formulation;
use seriation::neighborhoods::Neighborhood;
use seriation::measures::StressParams;
use seriation::{Engine, Measure, Result, SeriationError};

const EXIT_CODES: &str = "\
Exit codes:
  0  solved (optimal or feasible with a gap)
  1  usage or configuration error
  2  the model is infeasible
  3  a limit stopped the search before any solution was found
  4  any other failure (I/O, external solver, integrity check)

The external solver configuration is read from --solver-config or from the
file named by SERIATION_SOLVER_CONFIG.";

/// Exact matrix seriation.
#[derive(Debug, Parser, Serialize)]
#[command(name = "seriate", version, after_help = EXIT_CODES)]
pub struct RunConfig {
    /// Log level (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Find an optimal row and column order of a CSV matrix.
    Seriate(SeriateArgs),
    /// Report all measures of a matrix, optionally after reordering it.
    Evaluate(EvaluateArgs),
    /// Generate a seeded benchmark instance.
    Generate(GenerateArgs),
    /// Write a mixed-integer model in LP format, optionally with tailoring constraints.
    EmitModel(EmitModelArgs),
    /// Draw a grayscale heatmap of a matrix or of a stored result.
    Render(RenderArgs),
    /// Run a generated benchmark suite and aggregate the improvements.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Von Neumann stress.
    Vn,
    /// Moore stress.
    Moore,
    /// Two-step cross stress.
    Cross2,
    /// Stress over the Euclidean ball of radius --eps.
    Eps,
    /// Stress over the offsets given in --offsets.
    Custom,
    /// Measure of effectiveness (maximized).
    Me,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value = "vn")]
    pub measure: MeasureKind,
    /// Stress exponent.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: u32,
    /// Radius of the --measure eps neighborhood.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Offsets of the --measure custom neighborhood, e.g. "1,0;0,1;-1,0".
    #[arg(long)]
    pub offsets: Option<String>,
}

impl MeasureArgs {
    pub fn to_measure(&self) -> Result<Measure> {
        let usage = |msg: &str| Err(SeriationError::InvalidArgument(msg.into()));
        if self.eps.is_some() && self.measure != MeasureKind::Eps {
            return usage("--eps only applies to --measure eps");
        }
        if self.offsets.is_some() && self.measure != MeasureKind::Custom {
            return usage("--offsets only applies to --measure custom");
        }
        match self.measure {
            MeasureKind::Vn => Measure::von_neumann(self.p),
            MeasureKind::Moore => Measure::moore(self.p),
            MeasureKind::Cross2 => Measure::cross2(self.p),
            MeasureKind::Me => Ok(Measure::Effectiveness),
            MeasureKind::Eps => match self.eps {
                Some(eps) => Measure::epsilon(eps, self.p),
                None => usage("--measure eps needs --eps"),
            },
            MeasureKind::Custom => match &self.offsets {
                Some(text) => Ok(Measure::Stress(StressParams::new(Neighborhood::parse_offsets(text)?, self.p)?)),
                None => usage("--measure custom needs --offsets"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Brute,
    Heldkarp,
    Bnb,
    Milp,
    Alternating,
    Auto,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Brute => Engine::Brute,
            EngineArg::Heldkarp => Engine::HeldKarp,
            EngineArg::Bnb => Engine::Bnb,
            EngineArg::Milp => Engine::Milp,
            EngineArg::Alternating => Engine::Alternating,
            EngineArg::Auto => Engine::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum FormulationArg {
    #[value(name = "pam-l1")]
    PamL1,
    #[value(name = "pam-l2")]
    PamL2,
    #[value(name = "hpm")]
    Hpm,
    #[value(name = "hpm-moore")]
    HpmMoore,
    #[value(name = "hpm-cross2")]
    HpmCross2,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::PamL1 => Formulation::PamL1,
            FormulationArg::PamL2 => Formulation::PamL2,
            FormulationArg::Hpm => Formulation::Hpm,
            FormulationArg::HpmMoore => Formulation::HpmMoore,
            FormulationArg::HpmCross2 => Formulation::HpmCross2,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LimitArgs {
    /// Wall-clock limit in seconds for branch-and-bound and the alternating heuristics.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Node limit for branch-and-bound.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Worker threads for the parallel engines.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriateArgs {
    /// Input matrix (CSV, optional header row and label column).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Use one permutation for rows and columns (square input only).
    #[arg(long)]
    pub coordinated: bool,
    /// Engine. `auto` enumerates when the search space is at most 5!·5!,
    /// runs Held–Karp up to 20 rows or columns (16 for cross2) and
    /// branch-and-bound beyond; Moore uses the alternating engine and other
    /// neighborhoods the external solver.
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: EngineArg,
    /// Model handed to the external solver by --engine milp.
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    /// TOML file with the external solver command.
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Result document (JSON); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Heatmap of the reordered matrix (.svg or .pgm).
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    /// Record the runtime in the result document.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Permutation file: one line of 1-based positions for both axes, or two
    /// lines (rows, then columns).
    #[arg(long)]
    pub perm: Option<PathBuf>,
    /// Stress exponent of the deviations.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: u32,
    /// Report file (JSON); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// easy, sqr, nsq, bin_square or bin_nonsquare.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// Columns; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Probability of a one (binary families).
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON sidecar with the generating points; defaults to the CSV path with a .json extension.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EmitModelArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub coordinated: bool,
    /// Defaults to the HPM variant of the measure, or pam-l2 for other neighborhoods.
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    /// Omit the symmetry-breaking constraint of PAM models.
    #[arg(long)]
    pub no_symmetry_breaking: bool,
    /// Rows that must lie within kappa positions of each other: `i,j,...:kappa` (1-based).
    #[arg(long)]
    pub cluster: Vec<String>,
    /// As --cluster, for columns.
    #[arg(long)]
    pub cluster_cols: Vec<String>,
    /// Rows confined to a set of positions: `i[,j...]:pos-set`, e.g. `2:1-3,7` (1-based).
    #[arg(long)]
    pub pin: Vec<String>,
    /// As --pin, for columns.
    #[arg(long)]
    pub pin_cols: Vec<String>,
    /// LP file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also solve the model with the external solver.
    #[arg(long)]
    pub solve: bool,
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
    /// Result document of --solve; standard output when omitted.
    #[arg(long)]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    /// Matrix CSV to draw as is.
    #[arg(long = "in", conflicts_with = "result", required_unless_present = "result")]
    pub input: Option<PathBuf>,
    /// Result document whose reordered matrix is drawn.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Image path; the format follows the extension unless --format is given.
    #[arg(long)]
    pub out: PathBuf,
    /// svg or pgm.
    #[arg(long)]
    pub format: Option<String>,
    /// Draw the values unscaled instead of min–max normalizing them first.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Matrix sizes; nonsquare families use every pair n < m.
    #[arg(long, value_delimiter = ',', default_value = "10,15,20")]
    pub sizes: Vec<usize>,
    /// Families; `bin` stands for bin_square and bin_nonsquare.
    #[arg(long, value_delimiter = ',', default_value = "easy,sqr,nsq,bin")]
    pub families: Vec<String>,
    /// Densities of the binary families.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub densities: Vec<f64>,
    /// Instances per configuration, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 5)]
    pub repeats: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Measures: vn, moore, cross2, me.
    #[arg(long, value_delimiter = ',', default_value = "vn,moore,me")]
    pub measures: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: u32,
    /// Order rows and columns jointly on square instances.
    #[arg(long)]
    pub coordinated: bool,
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: EngineArg,
    /// Per-run wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Instances solved concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = "bench")]
    pub out_dir: PathBuf,
}
