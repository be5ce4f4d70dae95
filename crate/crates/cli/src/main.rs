use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vdwgate_cli::output::{emit, to_csv, to_json};
use vdwgate_cli::{
    convergence_rows, fidelity, linspace, simulate, solve, sweep, sweep_row, CliError, OutputFormat, RunConfig,
    SweepAxis,
};

#[derive(Parser)]
#[command(name = "vdwgate", version, about = "Weak van der Waals Rydberg gate simulator")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for noise averaging
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the interaction, pulse durations and trap separation
    Solve,
    /// Simulate the gate at its nominal interaction
    Simulate,
    /// Average the gate fidelity over position fluctuations
    Fidelity,
    /// Repeat the fidelity run along one parameter axis
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: SweepAxis,
    /// First value of a linear range
    #[arg(long, requires_all = ["to", "points"], conflicts_with = "values", allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, requires = "from")]
    to: Option<f64>,
    #[arg(long, requires = "from")]
    points: Option<usize>,
    /// Explicit comma-separated values
    #[arg(long, value_delimiter = ',', required_unless_present = "from")]
    values: Option<Vec<f64>>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let out = cli.out.clone().or_else(|| cfg.output.path.clone());
    let format = cli.format.or(cfg.output.format);

    let text = match cli.command {
        Command::Solve | Command::Simulate => {
            if format == Some(OutputFormat::Csv) {
                return Err(CliError::Config("--format: csv is only available for fidelity and sweep".into()));
            }
            let rec = if matches!(cli.command, Command::Solve) { solve(&cfg)? } else { simulate(&cfg)? };
            to_json(&rec)?
        }
        Command::Fidelity => {
            let rec = fidelity(&cfg)?;
            match format.unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => to_json(&rec)?,
                OutputFormat::Csv => to_csv(&convergence_rows(&rec))?,
            }
        }
        Command::Sweep(args) => {
            let values = match (args.values, args.from, args.to, args.points) {
                (Some(v), _, _, _) => v,
                (None, Some(from), Some(to), Some(points)) => linspace(from, to, points)?,
                _ => return Err(CliError::Config("sweep: give --values or --from/--to/--points".into())),
            };
            let records = sweep(&cfg, args.axis, &values)?;
            match format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Json => to_json(&records)?,
                OutputFormat::Csv => {
                    let rows: Vec<_> = records.iter().map(|r| sweep_row(args.axis, r)).collect();
                    to_csv(&rows)?
                }
            }
        }
    };
    emit(&text, out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vdwgate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
