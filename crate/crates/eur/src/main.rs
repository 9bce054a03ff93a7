use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eur::{run, CliError, Format, Options, Outcome, RunConfig};

/// Entropic energy-time uncertainty relations for the complement-of-H measurement.
#[derive(Debug, Parser)]
#[command(name = "eur", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for random states and the sweep (a `seed` in the config wins).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Report format; repeat for several. Defaults to csv and jsonl.
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every relation for the configured spectrum, state and s.
    Certify,
    /// Data for R_α(E) + R_β(T) against ln(s+1) on a qubit.
    Fig1,
    /// Randomized campaign over presets, states, s, α and η.
    Sweep,
    /// Time density and the continuous-time relations.
    Continuum,
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (config, base_dir) = match &cli.config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    let mut formats = cli.format.clone();
    formats.sort();
    formats.dedup();
    if formats.is_empty() {
        formats = vec![Format::Csv, Format::Jsonl];
    }
    let options = Options {
        out_dir: cli.out_dir.clone(),
        formats,
        seed: cli.seed,
        base_dir,
    };
    run::with_thread_limit(|| match cli.command {
        Command::Certify => run::certify(&config, &options),
        Command::Fig1 => run::fig1(&config, &options),
        Command::Sweep => run::sweep(&config, &options),
        Command::Continuum => run::continuum(&config, &options),
    })?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            println!("{} reports, {} violations", outcome.reports, outcome.violations);
            for (relation, slack) in &outcome.min_slack {
                println!("  {relation:<14} min slack {slack:.3e}");
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            if outcome.all_hold() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("eur: {err}");
            err.exit_code()
        }
    }
}
