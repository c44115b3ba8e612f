use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinlab_cli::{acceptance, execute, Command, ExperimentConfig, RunError};

/// Spins of convex bodies: cosine transforms, zonoid certificates and direction scans.
#[derive(Parser)]
#[command(name = "spinlab", version)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Spin the body about an axis and tabulate the profile.
    Spin(RunArgs),
    /// Apply the cosine transform to the support function.
    Cosine(RunArgs),
    /// Invert the cosine transform: generating coefficients and density.
    Invert(RunArgs),
    /// Certify zonoid status on the full sphere.
    Certify(RunArgs),
    /// Certify every spin over hemisphere directions.
    Scan(RunArgs),
    /// Nonnegative least-squares zonotope fit.
    Fit(RunArgs),
    /// Run the built-in acceptance suite.
    Selftest {
        #[arg(long, env = "SPINLAB_THREADS")]
        threads: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; defaults to the config's `out`, else the config path without extension.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, env = "SPINLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    match threads {
        Some(0) => Err("--threads must be positive".into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string()),
        None => Ok(()),
    }
}

fn run(command: Command, args: RunArgs) -> Result<(), RunError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let prefix = args
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| args.config.with_extension("").display().to_string());
    let bundle = execute(&config, command)?;
    for path in bundle.write(&prefix)? {
        eprintln!("wrote {}", path.display());
    }
    let result = &bundle.summary["result"];
    if let Some(v) = result.get("verdict").or_else(|| result.get("aggregate")) {
        println!("{}: {}", command.as_str(), v.as_str().unwrap_or_default());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        CliCommand::Selftest { threads, seed } => {
            if let Err(e) = init_threads(threads) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            let outcomes = acceptance::run_all(seed);
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            return if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
        CliCommand::Spin(a) => (Command::Spin, a),
        CliCommand::Cosine(a) => (Command::Cosine, a),
        CliCommand::Invert(a) => (Command::Invert, a),
        CliCommand::Certify(a) => (Command::Certify, a),
        CliCommand::Scan(a) => (Command::Scan, a),
        CliCommand::Fit(a) => (Command::Fit, a),
    };
    if let Err(e) = init_threads(args.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
