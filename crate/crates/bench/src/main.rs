use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonstat_bench::{validate::validate, BenchConfig, BenchError};

#[derive(Parser)]
#[command(name = "bench", version, about = "Run and audit online learning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, seed) pair and write CSVs, report.json and plot.py.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check a config and print the derived pools, rates and thresholds.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::Run { config, out, jobs } => {
            let cfg = BenchConfig::load(&config)?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| BenchError::config("output_dir", "pass --out or set output_dir"))?;
            let report = nonstat_bench::run(&cfg, &out, jobs)?;
            for a in &report.algorithms {
                if let Some(p) = a.aggregate.last() {
                    println!(
                        "{:<40} loss {:>14.4} ± {:<12.4} time {:>10.3} ms  proj_X {:>10.0}",
                        a.label,
                        p.cum_loss_mean,
                        p.cum_loss_std,
                        p.cum_time_ns_mean / 1e6,
                        p.proj_x_mean
                    );
                }
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = BenchConfig::load(&config)?;
            let v = validate(&cfg)?;
            for w in &v.warnings {
                println!("warning: {w}");
            }
            for l in &v.lines {
                println!("{l}");
            }
            Ok(())
        }
    }
}
