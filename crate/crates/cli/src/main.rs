use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;

use output::CliError;

#[derive(Parser, Debug)]
#[command(name = "gradproj", version, about = "Refinement, certification, decay and stability tables for L2 projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Refine a mesh with limited grading and write it with a grading report.
    Refine(RefineArgs),
    /// Extreme eigenvalues of the approximating operator against the mass matrix.
    Certify(CertifyArgs),
    /// Decay of the masked projection away from one element.
    Decay(DecayArgs),
    /// Write the q_new table, both stability tables and the CR thresholds.
    Tables(TablesArgs),
    /// Admissible exponents for a grading and a degree.
    Stability(StabilityArgs),
    /// Crouzeix-Raviart condition numbers and dimension thresholds.
    CrCheck(CrCheckArgs),
    /// Closure growth over repeated limited-grading refinements.
    ClosureBench(ClosureBenchArgs),
    /// Per-element levels and the grading of the mesh size.
    Grading(GradingArgs),
}

/// Where the mesh comes from: a file, a single reference simplex, or a
/// Kuhn cube.
#[derive(Args, Debug, Serialize)]
pub struct MeshArgs {
    /// Mesh JSON file. Overrides --dim/--cells.
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Kuhn cells per axis.
    #[arg(long, default_value_t = 1)]
    pub cells: usize,
    /// Use one reference simplex instead of the Kuhn cube.
    #[arg(long)]
    pub single: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct RefineArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    /// uniform, corner, none or random(fraction).
    #[arg(long, default_value = "uniform")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output mesh file.
    #[arg(long)]
    pub out: String,
    /// Grading report; defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Polynomial degree K or CR.
    #[arg(long, default_value = "1")]
    pub degree: String,
    /// Zero trace on the whole boundary.
    #[arg(long)]
    pub zero_trace: bool,
    /// Slack allowed on the condition number bound.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_kappa: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecayArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, default_value = "1")]
    pub degree: String,
    /// Dense index of the element L'.
    #[arg(long, default_value_t = 0)]
    pub origin: usize,
    #[arg(long, default_value_t = 8)]
    pub max_delta: u32,
    /// Random samples per distance.
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Slack on the decay bound and on monotonicity in δ.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_decay: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct TablesArgs {
    /// Directory receiving the TSV files.
    #[arg(long)]
    pub out_dir: String,
    /// Largest dimension probed for the CR thresholds.
    #[arg(long, default_value_t = 100)]
    pub probe_limit: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// K, inf or CR.
    #[arg(long, default_value = "1")]
    pub degree: String,
    /// Mesh grading. Either this or --preset.
    #[arg(long)]
    pub gamma_h: Option<f64>,
    /// Published grading of a refinement strategy, e.g. 2D-RG or BiSecLG.
    #[arg(long)]
    pub preset: Option<String>,
    /// Refinement parameter used by the BiSecLG preset.
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_rho: f64,
    /// Lp or W1p.
    #[arg(long, default_value = "Lp")]
    pub norm: String,
    /// Exponent to test; may be inf.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CrCheckArgs {
    /// Kuhn cells per axis for the certified meshes.
    #[arg(long, default_value_t = 2)]
    pub cells: usize,
    /// Corner refinement rounds applied before certifying.
    #[arg(long, default_value_t = 2)]
    pub rounds: usize,
    #[arg(long, default_value_t = 100)]
    pub probe_limit: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_kappa: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClosureBenchArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    #[arg(long, default_value = "random(0.1)")]
    pub policy: String,
    #[arg(long, default_value_t = 8)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct GradingArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// vertex or face neighbours.
    #[arg(long, default_value = "vertex")]
    pub adjacency: String,
    #[arg(long)]
    pub out: Option<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("GP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let config = serde_json::to_value(&cli.command).expect("config serializes");
    match &cli.command {
        Command::Refine(a) => commands::refine(a, &config),
        Command::Certify(a) => commands::certify(a, &config),
        Command::Decay(a) => commands::decay(a, &config),
        Command::Tables(a) => commands::tables(a, &config),
        Command::Stability(a) => commands::stability(a, &config),
        Command::CrCheck(a) => commands::cr_check(a, &config),
        Command::ClosureBench(a) => commands::closure_bench(a, &config),
        Command::Grading(a) => commands::grading(a, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
