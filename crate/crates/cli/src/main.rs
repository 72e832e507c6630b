use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use petzlab_cli::{run, CliError, Experiment, ExperimentSpec};

/// Continuous-time Petz recovery experiments.
#[derive(Parser, Debug)]
#[command(name = "petzlab", version)]
struct Args {
    /// reverse-qubit | reverse-unitary | hardware-sweep | code-optimize | strobe | bloch-check
    experiment: Experiment,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for every random choice the experiment makes.
    #[arg(long)]
    seed: u64,
    /// Worker threads; falls back to PETZLAB_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("PETZLAB_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("PETZLAB_THREADS={v:?} is not a thread count")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::config("thread count must be ≥ 1"));
    }
    Ok(n)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = threads(args.threads).and_then(|n| {
        if let Some(n) = n {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?;
        }
        run(&ExperimentSpec {
            name: args.experiment,
            config_path: args.config.clone(),
            output_dir: args.out.clone(),
            seed: args.seed,
            threads: rayon::current_num_threads(),
        })
    });
    match result {
        Ok(m) => {
            println!(
                "{}: wrote {} files to {} in {:.2} s",
                m.experiment,
                m.files.len() + 1,
                args.out.display(),
                m.wall_time_s
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("petzlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
