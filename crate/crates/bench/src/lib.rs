//! Benchmark harness: runs (algorithm × seed) grids on a synthetic drifting
//! regression stream and writes per-run CSV curves, an aggregate JSON report
//! and a plotting script.

pub mod config;
pub mod report;
pub mod runner;
pub mod validate;

use std::path::Path;

pub use config::BenchConfig;
pub use report::BenchReport;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl BenchError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        BenchError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn runtime(e: nonstat_oco::Error) -> Self {
        BenchError::Runtime(e.to_string())
    }

    pub fn io(e: std::io::Error) -> Self {
        BenchError::Io(e.to_string())
    }

    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } => 1,
            BenchError::Runtime(_) | BenchError::Io(_) => 2,
        }
    }
}

/// Runs the whole grid and writes every output file.
///
/// Failed runs are recorded in the report and reported as an error after
/// all other outputs have been written.
pub fn run(cfg: &BenchConfig, out: &Path, jobs: usize) -> Result<BenchReport, BenchError> {
    cfg.check()?;
    let algorithms = cfg.resolve_algorithms()?;
    let results = runner::run_grid(cfg, &algorithms, jobs)?;
    let report = report::write_outputs(cfg, &algorithms, results, out)?;
    let failed: Vec<String> = report
        .algorithms
        .iter()
        .flat_map(|a| {
            a.runs
                .iter()
                .filter(|r| r.status == report::RunStatus::Failed)
                .map(move |r| format!("{} seed {}: {}", a.label, r.seed, r.error.as_deref().unwrap_or("")))
        })
        .collect();
    if !failed.is_empty() {
        return Err(BenchError::Runtime(format!(
            "{} run(s) failed: {}",
            failed.len(),
            failed.join("; ")
        )));
    }
    Ok(report)
}
