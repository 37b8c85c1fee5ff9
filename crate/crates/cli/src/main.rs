//! `sdot`: solve semi-discrete OT problems and replicate the rate
//! experiments from config files.
//!
//! Exit codes: 0 success, 1 a self-check failed, 2 bad arguments or config,
//! 3 runtime failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sdot", version, about = "Averaged projected SGD for semi-discrete optimal transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "SDOT_SGD_THREADS")]
    threads: Option<usize>,

    /// Only print errors
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    /// More logging (repeat for more)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Config file (TOML)
    #[arg(long)]
    config: PathBuf,

    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Override the iteration count of every optimizer (accepts 1e4)
    #[arg(long, value_parser = parse_count)]
    iters: Option<u64>,

    /// Record wall times in the traces (the CSVs are then not reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimizer on a fixed target
    Solve(RunArgs),
    /// Replicate an experiment: traces per (config, repeat) and slope summary
    Experiment {
        #[command(flatten)]
        run: RunArgs,

        /// Override the number of repeats
        #[arg(long, value_parser = parse_count)]
        repeats: Option<u64>,
    },
    /// Estimate the radius of a high-mass ball from samples
    EstimateRadius(CommonArgs),
    /// Run the 1-D oracle self-checks
    OracleCheck(CommonArgs),
}

/// Nonnegative integer, also written as `1e4` or `3e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, 2) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start the thread pool: {e}");
            return ExitCode::from(3);
        }
    }

    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a.common.config, a.common.seed, &a.out, a.iters, a.timing, cli.quiet),
        Command::Experiment { run: a, repeats } => commands::experiment(
            &a.common.config,
            a.common.seed,
            &a.out,
            a.iters,
            repeats.map(|r| r as usize),
            a.timing,
            cli.quiet,
        ),
        Command::EstimateRadius(a) => commands::radius(&a.config, a.seed),
        Command::OracleCheck(a) => commands::oracle_check(&a.config, a.seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
