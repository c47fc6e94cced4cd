use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use radhydro_cli::{load_config_for, run, Mode, OUT_ENV};

#[derive(Parser)]
#[command(name = "radhydro", version, about = "Radiation hydrodynamics solver and ε-convergence harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the ε-system (with the limit run as reference).
    SimulateEps(CommonArgs),
    /// Integrate the limit system.
    SimulateLimit(CommonArgs),
    /// Sweep ε, compare with the limit solution and fit convergence rates.
    ConvergenceStudy(CommonArgs),
    /// Check the P1 moment closure and the radiative relaxation.
    ClosureCheck(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (the RADHYDRO_OUT environment variable takes precedence).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for concurrent ε runs.
    #[arg(long)]
    threads: Option<usize>,

    /// Exit nonzero when any configured bound fails.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    strict: bool,
}

impl Command {
    fn split(self) -> (Mode, CommonArgs) {
        match self {
            Command::SimulateEps(a) => (Mode::SimulateEps, a),
            Command::SimulateLimit(a) => (Mode::SimulateLimit, a),
            Command::ConvergenceStudy(a) => (Mode::ConvergenceStudy, a),
            Command::ClosureCheck(a) => (Mode::ClosureCheck, a),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (mode, args) = Cli::parse().command.split();

    let cfg = match load_config_for(&args.config, Some(mode)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out_dir = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or(args.out)
        .unwrap_or_else(|| cfg.output_dir.clone());

    let output = match run(&cfg, args.threads) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = output.write(&out_dir) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    for c in &output.summary.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        println!("{status}  {:<28} {:.6e}", c.name, c.value);
    }
    println!("results written to {}", out_dir.display());

    if args.strict && output.summary.exit_status != 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
