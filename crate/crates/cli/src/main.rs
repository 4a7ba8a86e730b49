use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geospline_core::experiment::{run_experiment, ExperimentConfig};
use geospline_core::harness::{builtin_curve, BUILTIN_CURVES};
use geospline_core::Error;

/// Convergence studies for spline interpolation on manifolds.
#[derive(Parser)]
#[command(name = "geospline", version, arg_required_else_help = true)]
struct Cli {
    /// Print the built-in test curves and exit.
    #[arg(long)]
    list_curves: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the studies in a JSON config (an empty file runs the defaults).
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<u8, Error> {
    let cfg = ExperimentConfig::from_path(&config)?;
    let outcome = run_experiment(&cfg)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    outcome.write(&dir)?;
    for c in &outcome.checks {
        let tag = if c.pass() { "pass" } else { "FAIL" };
        println!("{tag}  {}  ({})", c.name, c.detail);
    }
    println!("wrote {}", dir.display());
    Ok(if outcome.solver_failed() {
        EXIT_ERROR
    } else if outcome.pass() {
        0
    } else {
        EXIT_FAIL
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_curves {
        for name in BUILTIN_CURVES {
            let manifold = builtin_curve(name).map(|c| c.manifold().to_string()).unwrap_or_default();
            println!("{name}\t{manifold}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run { config, out }) = cli.command else {
        return ExitCode::SUCCESS;
    };
    match run(config, out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
