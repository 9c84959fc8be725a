use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lvn_scenarios::{exit_code, parse_config, run_scenario, ScenarioError, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "lvn", version, about = "Run invariant, density-matrix and SUSY scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Driven two-level atom: density matrix, direct and LR trajectories.
    Rabi(RunArgs),
    /// Propagated invariant, its phases and the LR solution.
    Invariant(RunArgs),
    /// Unitary reduction of a driven spin into its rotating frame.
    Reduce(RunArgs),
    /// Partner Hamiltonians of a superpotential on a grid.
    Susy(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the `out` key of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when any check fails.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Rabi(a) => ("rabi", a),
        Command::Invariant(a) => ("invariant", a),
        Command::Reduce(a) => ("reduce", a),
        Command::Susy(a) => ("susy", a),
    };
    ExitCode::from(run(kind, args) as u8)
}

fn run(kind: &str, args: &RunArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cfg.kind() != kind {
        eprintln!("error: kind: config is {:?} but the subcommand is {kind:?}", cfg.kind());
        return EXIT_CONFIG;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind));
    match run_scenario(&cfg, &out) {
        Ok(report) => {
            for (name, c) in &report.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                println!("{status} {name}: {:.3e} ({:?} {:.3e})", c.value, c.comparison, c.threshold);
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("report: {}", lvn_scenarios::report::report_path(&out).display());
            exit_code(&report, args.check)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let ScenarioError::Numeric(_) = e {
                eprintln!("hint: reduce the step size or widen the grid");
            }
            e.exit_code()
        }
    }
}
