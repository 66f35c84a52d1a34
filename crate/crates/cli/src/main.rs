use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use steklov_cli::commands;
use steklov_cli::error::{CliError, CliResult, EXIT_OK};
use steklov_cli::ExperimentConfig;

/// Steklov spectra as limits of boundary-concentrated Neumann problems.
#[derive(Parser)]
#[command(name = "steklov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    keys: KeyFlags,
}

/// One flag per configuration key, passed through the same parser as the file.
#[derive(Args)]
struct KeyFlags {
    #[arg(long, global = true)]
    dimension: Option<String>,
    #[arg(long, global = true)]
    mass: Option<String>,
    #[arg(long = "eps-grid", global = true, allow_hyphen_values = true)]
    eps_grid: Option<String>,
    #[arg(long, global = true)]
    refinement: Option<String>,
    #[arg(long, global = true)]
    count: Option<String>,
    #[arg(long, global = true)]
    indices: Option<String>,
    #[arg(long, global = true)]
    clusters: Option<String>,
    #[arg(long, global = true)]
    order: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    amplitude: Option<String>,
    #[arg(long, global = true)]
    symmetry: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    jobs: Option<String>,
    /// Mesh file used instead of the generated disk mesh.
    #[arg(long, global = true)]
    mesh: Option<String>,
}

impl KeyFlags {
    fn pairs(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("dimension", &self.dimension),
            ("mass", &self.mass),
            ("eps_grid", &self.eps_grid),
            ("refinement", &self.refinement),
            ("count", &self.count),
            ("indices", &self.indices),
            ("clusters", &self.clusters),
            ("order", &self.order),
            ("amplitude", &self.amplitude),
            ("symmetry", &self.symmetry),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("format", &self.format),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("mesh", &self.mesh),
        ]
    }
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exact ball spectrum, with the disk FEM spectrum beside it.
    Steklov,
    /// Concentrated Neumann eigenvalues approaching the Steklov limit.
    Convergence,
    /// One-sided derivatives in ε against the closed-form slope.
    Derivative,
    /// Criticality deviations for chosen eigenvalue clusters.
    Criticality,
    /// Random symmetric densities against the constant density.
    BandleHersch,
    /// First Neumann eigenvalue of thin annuli.
    Niwa,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Steklov => "steklov",
            Command::Convergence => "convergence",
            Command::Derivative => "derivative",
            Command::Criticality => "criticality",
            Command::BandleHersch => "bandle-hersch",
            Command::Niwa => "niwa",
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    for (key, value) in cli.keys.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    }
    let record = commands::run(cli.command.name(), &cfg)?;
    let written = record.emit(cfg.format(), cfg.out.as_deref())?;
    let mut err = std::io::stderr().lock();
    for path in written {
        let _ = writeln!(err, "wrote {}", path.display());
    }
    let _ = write!(err, "{}", record.summary());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
