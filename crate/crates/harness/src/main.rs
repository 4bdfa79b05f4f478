use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dlab_harness::run::{base_dir_of, run, RunOptions};
use dlab_harness::schedule::resolve_workers;
use dlab_harness::{ExperimentConfig, HarnessError, Kind};

#[derive(Parser)]
#[command(name = "dlab", version, about = "Randomized energy-critical NLS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the many-fold decomposition atlas of a datum.
    Decompose(Args),
    /// Draw randomized data from the atlas.
    Randomize(Args),
    /// Solve the regularized forced equation and store the trajectory.
    Evolve(Args),
    /// Evaluate space-time norms of a stored trajectory.
    Norms(Args),
    /// Monte-Carlo estimate of randomized Strichartz moments.
    Montecarlo(Args),
    /// Energy increment decomposition and bootstrap on a forced run.
    EnergyAudit(Args),
    /// Distance of forced from unforced runs as the forcing shrinks.
    Perturb(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to $DLAB_WORKERS, then the core count.
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with status 1 when an invariant check fails.
    #[arg(long)]
    check: bool,
}

impl Command {
    fn split(self) -> (Kind, Args) {
        match self {
            Command::Decompose(a) => (Kind::Decompose, a),
            Command::Randomize(a) => (Kind::Randomize, a),
            Command::Evolve(a) => (Kind::Evolve, a),
            Command::Norms(a) => (Kind::Norms, a),
            Command::Montecarlo(a) => (Kind::Montecarlo, a),
            Command::EnergyAudit(a) => (Kind::EnergyAudit, a),
            Command::Perturb(a) => (Kind::Perturb, a),
        }
    }
}

fn execute(kind: Kind, args: Args) -> Result<i32, HarnessError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        return Err(HarnessError::Config(format!(
            "config is for '{}' but the subcommand is '{}'",
            config.kind.command(),
            kind.command()
        )));
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let base_dir = base_dir_of(&args.config);
    // --out is relative to the working directory, `out` in the file to the file.
    let out = match (args.out, &config.out) {
        (Some(o), _) => std::env::current_dir()?.join(o),
        (None, Some(o)) => base_dir.join(o),
        (None, None) => base_dir.join(format!("dlab-{}", kind.command())),
    };
    config.out = Some(out.clone());
    let workers = resolve_workers(args.workers.or(config.workers))?;
    let opts = RunOptions { base_dir, out, workers, check: args.check };
    let outcome = run(&config, &opts)?;
    print!("{}", outcome.stdout);
    for (name, ok) in &outcome.manifest.checks {
        if !ok {
            eprintln!("check failed: {name}");
        }
    }
    if !outcome.manifest.failed_tasks.is_empty() {
        eprintln!("failed tasks: {:?}", outcome.manifest.failed_tasks);
    }
    Ok(outcome.exit_code(args.check))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("dlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
