use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use uavcov::cli::{self, RunOptions};

#[derive(Parser)]
#[command(version, about = "mmWave UAV uplink coverage simulator")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the Monte Carlo drops of a scenario and write its outputs.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Warn about unknown keys instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        lenient: bool,
    },
    /// Strongest-path elevation AOA sweep and spread map around one gNB.
    AoaSweep {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lenient: bool,
    },
}

fn load(path: &PathBuf, lenient: bool) -> anyhow::Result<cli::Scenario> {
    let s = cli::parse_scenario(path, lenient)?;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    Ok(s)
}

fn run(args: Args) -> anyhow::Result<()> {
    match args.cmd {
        Cmd::Simulate { scenario, out, seed, threads, lenient } => {
            let s = load(&scenario, lenient)?;
            let opts = RunOptions { out_dir: out, seed, threads };
            for v in cli::run_scenario(&s, &opts).context("simulation failed")? {
                let c = &v.summary.counters;
                println!(
                    "{}: {} records, {} links, {} clamped paths, {} unconverged",
                    v.dir.display(),
                    v.report.records.len(),
                    c.links_evaluated,
                    c.clamped_paths,
                    c.unconverged_links
                );
            }
        }
        Cmd::Validate { scenario, lenient } => {
            let s = load(&scenario, lenient)?;
            println!("{}: ok ({} run(s))", scenario.display(), s.variants.len());
        }
        Cmd::AoaSweep { scenario, out, seed, lenient } => {
            let s = load(&scenario, lenient)?;
            let opts = RunOptions { out_dir: out, seed, threads: None };
            let o = cli::run_aoa_sweep(&s, &opts)?;
            println!("{}\n{}", o.sweep_csv.display(), o.std_csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
