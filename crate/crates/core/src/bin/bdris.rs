use std::path::PathBuf;
use std::process::ExitCode;

use bdris_isac::config::ArchKind;
use bdris_isac::experiments::{
    load_config, run_beampattern_experiment, run_gain_matrix_experiment, run_single_solve,
    run_tradeoff_experiment, write_report, write_table, Overrides, WrittenOutputs,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bdris", version, about = "BD-RIS ISAC beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-η user gain matrices and their diagonal-dominance ratios.
    GainMatrix(Flags),
    /// Per-η beam patterns over the azimuth grid.
    Beampattern(Flags),
    /// Rate against sensing gain for every architecture and η.
    Tradeoff(Flags),
    /// One solve; writes the full report as JSON.
    Solve(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list; `solve` uses the first value.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_arch)]
    arch: Option<ArchKind>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_arch(s: &str) -> Result<ArchKind, String> {
    ArchKind::parse(s).map_err(|e| e.to_string())
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            eta: self.eta.clone(),
            arch: self.arch,
            group_size: self.group_size,
            trials: self.trials,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> bdris_isac::Result<WrittenOutputs> {
    let (flags, name) = match &cli.command {
        Command::GainMatrix(f) => (f, "gain_matrix"),
        Command::Beampattern(f) => (f, "beampattern"),
        Command::Tradeoff(f) => (f, "tradeoff"),
        Command::Solve(f) => (f, "solve"),
    };
    let cfg = load_config(flags.config.as_deref(), &flags.overrides())?;
    match cli.command {
        Command::GainMatrix(_) => write_table(&cfg, name, &run_gain_matrix_experiment(&cfg)?),
        Command::Beampattern(_) => write_table(&cfg, name, &run_beampattern_experiment(&cfg)?),
        Command::Tradeoff(_) => write_table(&cfg, name, &run_tradeoff_experiment(&cfg)?),
        Command::Solve(_) => write_report(&cfg, &run_single_solve(&cfg)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{}", out.data.display());
            println!("{}", out.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
