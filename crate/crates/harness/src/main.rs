use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dlz_harness::{Command, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "dlz", version, about = "Dissipative Landau-Zener sweeps with a time-dependent master equation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write the full trajectory (populations, rates, thermodynamics) per point.
    Evolve(RunArgs),
    /// Write the final transition probability over a sweep grid.
    Lzprob(RunArgs),
    /// Write the final entropy balance over a sweep grid.
    Thermo(RunArgs),
    /// Write bath coefficients and the nonadiabatic coupling on the output grid.
    Rates(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set v=0.5 --set sweep.temperature=[1,25]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV (or directory for multi-point `evolve`/`rates`).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cmd: Command, args: RunArgs) -> Result<(), HarnessError> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.set, cmd.default_window_tau())?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = dlz_harness::run::execute(cmd, &cfg, &args.out, workers)?;
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Numerical(format!(
            "{} point(s) failed:\n  {}",
            outcome.failures.len(),
            outcome.failures.join("\n  ")
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Lzprob(a) => (Command::Lzprob, a),
        Sub::Thermo(a) => (Command::Thermo, a),
        Sub::Rates(a) => (Command::Rates, a),
    };
    match run(cmd, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
