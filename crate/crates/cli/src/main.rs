// `!(a < b)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ConfigError, Ctx, Status};
use config::RunConfig;

const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_FAILED: u8 = 3;
const EXIT_CONFIG: u8 = 64;

#[derive(Parser)]
#[command(name = "radial-plap", version, about = "Radial shooting solver for singular p-Laplacian problems")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for scans and sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the default configuration and exit
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Dirichlet problem and verify the solution
    Solve,
    /// Lambda sweep, plus a mu probe when mus are configured
    Sweep,
    /// Continuation in eps towards the singular problem
    Continue,
    /// First eigenpair of the p-Laplacian on the ball
    Eigen,
    /// Re-run the checks on a stored profile
    Verify { profile: PathBuf },
    /// Blow-up rescaling of a family of large shots
    Blowup,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    if cli.print_defaults {
        print!("{}", RunConfig::default().to_toml());
        return Ok(Status::Success);
    }
    let Some(command) = cli.command else {
        return Err(ConfigError("no command given (see --help)".into()).into());
    };
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| ConfigError(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    std::fs::create_dir_all(&cli.out)?;
    let ctx = Ctx { cfg, out: cli.out };
    match command {
        Command::Solve => commands::solve(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Continue => commands::continue_path(&ctx),
        Command::Eigen => commands::eigen(&ctx),
        Command::Verify { profile } => commands::verify(&ctx, &profile),
        Command::Blowup => commands::blowup(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::NoSolution) => ExitCode::from(EXIT_NO_SOLUTION),
        Ok(Status::Failed) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
