use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ghz_decay::harness::{parse_config, run_experiment, write_output, ExperimentKind};
use ghz_decay::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ghz-decay",
    version,
    about = "Entanglement decay of multi-qubit states under local noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `output_dir`, else ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form bound multipliers
    Bound(RunArgs),
    /// Negativity trajectory of one initial state
    Evolve(RunArgs),
    /// Monte-Carlo statistics over Haar-random states
    Sample(RunArgs),
    /// Depolarizing decay, most balanced cut
    Fig1(RunArgs),
    /// Depolarizing decay, least balanced cut
    Fig2(RunArgs),
    /// Dephasing decay versus register size
    Fig3(RunArgs),
}

fn run(cli: Cli) -> Result<()> {
    let (kind, args) = match cli.command {
        Command::Bound(a) => (ExperimentKind::Bound, a),
        Command::Evolve(a) => (ExperimentKind::Evolve, a),
        Command::Sample(a) => (ExperimentKind::Sample, a),
        Command::Fig1(a) => (ExperimentKind::Fig1, a),
        Command::Fig2(a) => (ExperimentKind::Fig2, a),
        Command::Fig3(a) => (ExperimentKind::Fig3, a),
    };
    let mut spec = parse_config(&args.config)?;
    if spec.kind != kind {
        return Err(Error::Config(format!(
            "config `kind` is \"{}\" but the subcommand is {}",
            spec.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    if args.threads.is_some() {
        spec.threads = args.threads;
    }
    if spec.threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }

    let output = run_experiment(&spec)?;
    if kind == ExperimentKind::Bound {
        for t in &output.tables {
            print!("{}", t.to_pretty());
        }
    }
    for path in write_output(&spec, &output, &spec.output_dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
