use std::path::PathBuf;
use std::process::ExitCode;

use cbgame::{emit_outputs, parse_config, run_scenario, CliError, Command, Format};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cbgame", version, about = "Central bank / systemic investor signaling game solver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv,json")]
    format: Vec<Format>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Bias, maximal partition, cutoffs and on-path rates.
    Solve,
    /// Cutoffs and residual variance of one partition equilibrium.
    Partition,
    /// Welfare reports for the competitive, transparent and cheap-talk profiles.
    Welfare,
    /// Optimal delegated banker weight under both communication modes.
    Banker,
    /// Trigger-strategy thresholds of the repeated game.
    Repeated,
    /// Monte Carlo estimates against closed forms.
    Simulate,
    /// Comparative-statics table.
    Scan,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Partition => Command::Partition,
            Cmd::Welfare => Command::Welfare,
            Cmd::Banker => Command::Banker,
            Cmd::Repeated => Command::Repeated,
            Cmd::Simulate => Command::Simulate,
            Cmd::Scan => Command::Scan,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut config = parse_config(&path)?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let reports = run_scenario(&config, cli.command.into(), workers)?;
    let manifest = emit_outputs(&reports, &cli.out, &cli.format)?;
    println!(
        "{}: wrote {} files to {}",
        manifest.command,
        manifest.files.len(),
        cli.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
