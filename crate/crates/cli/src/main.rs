use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use finsler_cli::{execute, exit, run_sweep, CliError, Command, RunConfig, SweepGrid};

/// Finsler geodesic and biharmonic-curve runs from a TOML config.
///
/// Relative output paths are resolved against $FINSLER_OUTPUT_DIR when set.
#[derive(Debug, Parser)]
#[command(name = "finsler", version)]
struct Args {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Trajectory output path; the summary is written beside it.
    #[arg(long)]
    out: Option<String>,
    /// Parameter grid (TOML) to fan out over, one output file per run.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn run(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    if let Some(grid_path) = &args.sweep {
        let base: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        let grid = SweepGrid::load(grid_path)?;
        let outcome = run_sweep(args.command, &base, &grid, args.out.as_deref())?;
        for r in &outcome.runs {
            println!("{} {}", r.status.label(), r.paths.trajectory.display());
            if let Some(m) = &r.message {
                eprintln!("  {m}");
            }
        }
        println!("sweep index {}", outcome.index.display());
        return Ok(outcome.exit_code());
    }
    let config = RunConfig::from_toml(&text)?;
    let outcome = execute(args.command, &config, args.out.as_deref())?;
    if let Some(m) = &outcome.message {
        eprintln!("{}: {m}", outcome.status.label());
    }
    if outcome.status != finsler_cli::Status::ValidationError {
        println!("{} {}", outcome.status.label(), outcome.paths.summary.display());
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e @ CliError::Io { .. }) => {
            eprintln!("{e}");
            exit::IO
        }
        Err(e) => {
            eprintln!("{e}");
            exit::VALIDATION
        }
    };
    ExitCode::from(code as u8)
}
