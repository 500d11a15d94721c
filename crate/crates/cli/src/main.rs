use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use neurohom_cli::{output_dir, run, ExperimentConfig, Mode, Outcome, RunOptions};

#[derive(Parser, Debug)]
#[command(
    name = "neurohom",
    version,
    about = "Heterogeneous and homogenized neural field experiments"
)]
struct Cli {
    #[command(subcommand)]
    mode: Command,

    /// Experiment configuration (TOML); the shipped default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for per-scale solves.
    #[arg(long, global = true, env = "NEUROHOM_THREADS")]
    threads: Option<usize>,

    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve the heterogeneous equation at every scale of the schedule.
    SolveHetero,
    /// Solve the homogenized equation.
    SolveHomog,
    /// Solve every scale and the limit, and report two-scale pairings.
    Sweep,
    /// Run the invariant suites.
    Verify,
    /// Run the brute-force and exact-solution comparisons.
    Oracle,
    /// Check the configuration and list violations.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let mut cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default_experiment(),
    };
    cfg.mode = match cli.mode {
        Command::SolveHetero => Mode::SolveHetero,
        Command::SolveHomog => Mode::SolveHomog,
        Command::Sweep => Mode::Sweep,
        Command::Verify => Mode::Verify,
        Command::Oracle => Mode::Oracle,
        Command::Validate => {
            let v = neurohom_cli::validate(&cfg);
            for m in &v {
                println!("{m}");
            }
            return if v.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            };
        }
    };
    let opts = RunOptions {
        out: output_dir(&cfg, cli.out),
        seed: cli.seed,
    };
    match run(&cfg, &opts) {
        Ok(Outcome::Passed) => {
            println!("pass: artifacts in {}", opts.out.display());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(f)) => {
            for m in &f {
                eprintln!("fail: {m}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
