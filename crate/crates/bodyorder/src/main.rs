use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bodyorder::config::ExperimentConfig;
use bodyorder::error::{CliError, CliResult};
use bodyorder::experiments;
use bodyorder::formats::write_table;
use bodyorder::presets::{self, PRESETS};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bodyorder", version, about = "Convergence experiments for body-ordered approximations")]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration by name.
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV; defaults to `output.path`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Error against degree, level or body order.
    Converge(RunArgs),
    /// Banded and neighbourhood truncation against the cutoff radius.
    Truncate(RunArgs),
    /// Potential derivative of the local observable against distance.
    Locality(RunArgs),
    /// Self-consistent density solve.
    Scf(RunArgs),
    /// Interpolation nodes and Green's function samples.
    Nodes(RunArgs),
    /// Vacuum cluster expansion by body order.
    Vacuum(RunArgs),
    /// Built-in configurations.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Dump { name: String },
}

fn load(args: &RunArgs) -> CliResult<String> {
    match (&args.config, &args.preset) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        (None, Some(name)) => Ok(presets::find(name)?.text.to_string()),
        (None, None) => Err(CliError::config("one of --config or --preset is required")),
    }
}

fn execute(command: &str, args: &RunArgs) -> CliResult<()> {
    let text = load(args)?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let table = experiments::run(command, &cfg)?;
    let seed = args.seed.unwrap_or(cfg.output.seed);
    let out = args.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => {
            let mut w = BufWriter::new(fs::File::create(&path)?);
            write_table(&table, &text, seed, command, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_table(&table, &text, seed, command, &mut w)?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let (command, args) = match &cli.command {
        Command::Converge(a) => ("converge", a),
        Command::Truncate(a) => ("truncate", a),
        Command::Locality(a) => ("locality", a),
        Command::Scf(a) => ("scf", a),
        Command::Nodes(a) => ("nodes", a),
        Command::Vacuum(a) => ("vacuum", a),
        Command::Preset { action } => {
            let mut out = io::stdout().lock();
            match action {
                PresetAction::List => {
                    for p in PRESETS {
                        writeln!(out, "{}\t{}", p.name, p.command)?;
                    }
                }
                PresetAction::Dump { name } => out.write_all(presets::find(name)?.text.as_bytes())?,
            }
            return Ok(());
        }
    };
    execute(command, args)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // reader closed early, e.g. `| head`
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bodyorder: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
