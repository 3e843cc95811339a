use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lrlab_cli::{execute, Command};

#[derive(Parser)]
#[command(name = "lrlab", version, about = "Certify Lieb-Robinson and propagator bounds on finite lattice systems")]
struct Args {
    /// Subcommand to run
    #[arg(value_enum)]
    command: Command,

    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,

    /// Output directory for report.json and profile.csv
    #[arg(long, default_value = "lrlab-out")]
    out: PathBuf,

    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,

    /// Debug logging, including intermediate bound sums
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(args.command, &args.config, &args.out) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
