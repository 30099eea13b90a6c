use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cocycle_lab::lab::{self, Experiment, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "cocycle-lab",
    version,
    about = "Experiments on random products of quasi-periodic cocycles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov spectrum with a sum-rule check
    Lyapunov(Common),
    /// Pinching and twisting certificates
    Certify(Common),
    /// Top exponent of a Schrödinger product over an energy grid
    SweepEnergy(Common),
    /// Exponents along an epsilon ladder of perturbations
    Continuity(Common),
    /// Search for a small perturbation that passes certification
    PerturbSearch(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; defaults to the config's "output", then <subcommand>.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything on the calling thread
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Lyapunov(a) => (ExperimentKind::Lyapunov, a),
        Command::Certify(a) => (ExperimentKind::Certify, a),
        Command::SweepEnergy(a) => (ExperimentKind::SweepEnergy, a),
        Command::Continuity(a) => (ExperimentKind::Continuity, a),
        Command::PerturbSearch(a) => (ExperimentKind::PerturbSearch, a),
    };
    match execute(kind, &args) {
        Ok(out) => {
            eprintln!("wrote {}", out.table.display());
            if let Some(p) = out.certificates {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cocycle-lab {}: {e}", kind.name());
            ExitCode::FAILURE
        }
    }
}

fn execute(kind: ExperimentKind, args: &Common) -> cocycle_lab::Result<lab::RunOutput> {
    if args.parallel == 0 {
        return Err(cocycle_lab::LabError::InvalidArgument(
            "--parallel must be at least 1".into(),
        ));
    }
    let exp = Experiment::load(&args.config, args.seed)?;
    let out = args
        .out
        .clone()
        .or_else(|| exp.config.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    lab::run(kind, &exp, &out, Some(args.parallel))
}
