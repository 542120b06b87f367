use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use doublewell::cli::{exit_code, run, Command, RunConfig};

/// Exact diagonalization of bosons in a tilted double well.
#[derive(Debug, Parser)]
#[command(name = "doublewell", version)]
struct Args {
    /// Command to run; overrides the config's `command` field.
    #[arg(value_enum)]
    command: Option<Command>,

    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, env = "DOUBLEWELL_THREADS")]
    threads: Option<usize>,

    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let result =
        RunConfig::load(&args.config).and_then(|c| run(&c, args.command, &args.out, args.verbose));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
