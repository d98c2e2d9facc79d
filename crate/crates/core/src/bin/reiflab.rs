use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reiflab::pipeline::{run_pipeline, Config, Pipeline};

/// Dirichlet Poisson experiments on Reifenberg-flat planar domains.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline named by `pipeline = "..."` in the config.
    Run(Flags),
    /// Build the configured domain and write it as JSON.
    GenerateDomain(Flags),
    /// Estimate the flatness of the configured domain.
    CheckFlatness(Flags),
    /// Mesh the domain and solve the Poisson problem.
    Solve(Flags),
    /// Monotonicity traces at boundary centres.
    Monotonicity(Flags),
    /// Energy decay fits at boundary and interior centres.
    Decay(Flags),
    /// Flatness certificate, Hölder fit and Campanato seminorm.
    Holder(Flags),
    /// Exponent tables.
    Exponents(Flags),
    /// Every pipeline above, one subdirectory each.
    All(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// TOML configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "reiflab-out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (pipeline, flags) = match cli.command {
        Command::Run(f) => (None, f),
        Command::GenerateDomain(f) => (Some(Pipeline::GenerateDomain), f),
        Command::CheckFlatness(f) => (Some(Pipeline::CheckFlatness), f),
        Command::Solve(f) => (Some(Pipeline::Solve), f),
        Command::Monotonicity(f) => (Some(Pipeline::Monotonicity), f),
        Command::Decay(f) => (Some(Pipeline::Decay), f),
        Command::Holder(f) => (Some(Pipeline::Holder), f),
        Command::Exponents(f) => (Some(Pipeline::Exponents), f),
        Command::All(f) => (Some(Pipeline::All), f),
    };
    let mut config = match &flags.config {
        Some(path) => match Config::read(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = flags.threads {
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run_pipeline(&config, pipeline, &flags.out)) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if pipeline == Some(Pipeline::Exponents) {
                if let Ok(table) = std::fs::read_to_string(flags.out.join("cor1.csv")) {
                    print!("{table}");
                }
            }
            println!("report: {}", flags.out.join("report.md").display());
            match outcome.first_failure() {
                Some(c) => {
                    eprintln!("check failed: {}: {}", c.name, c.detail);
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
