//! Per-run CSVs, the aggregate JSON report and the plotting script.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nonstat_oco::algorithms::{AlgorithmConfig, ProblemConstants};
use nonstat_oco::metrics::AdaptiveRegret;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, ResolvedAlgorithm};
use crate::runner::{CurveRow, JobResult};
use crate::BenchError;

pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.py";
pub const RUNS_DIR: &str = "runs";

pub fn csv_name(label: &str, seed: u64) -> String {
    format!("{label}__seed{seed}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    /// Canonical config the hash is computed from.
    pub config: BenchConfig,
    pub version: String,
    pub constants: ProblemConstants,
    pub record_every: usize,
    pub timing: String,
    /// How the environment, the comparators and the baselines are defined.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Final numbers of one (algorithm, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_cum_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_regret: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time_ns: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections_onto_x: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub markers: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_regret: Option<AdaptiveRegret>,
}

/// Mean and sample standard deviation across successful seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub round: usize,
    pub cum_loss_mean: f64,
    pub cum_loss_std: f64,
    pub cum_time_ns_mean: f64,
    pub cum_time_ns_std: f64,
    pub proj_x_mean: f64,
    pub grad_q_mean: f64,
    pub val_q_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub label: String,
    pub config: AlgorithmConfig,
    pub runs: Vec<RunReport>,
    pub aggregate: Vec<AggregatePoint>,
}

/// Ratios against the first contender. Wall-clock numbers depend on the
/// machine and are reported, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Informational {
    pub reference: String,
    pub wall_clock_ratio: BTreeMap<String, f64>,
    pub projection_ratio: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: Metadata,
    pub algorithms: Vec<AlgorithmReport>,
    pub informational: Informational,
}

impl BenchReport {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(BenchError::io)?;
        serde_json::from_str(&text).map_err(|e| BenchError::Runtime(e.to_string()))
    }
}

/// `(mean, sample std)`; the std of a single value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(curves: &[Vec<CurveRow>]) -> Vec<AggregatePoint> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let col = |f: &dyn Fn(&CurveRow) -> f64| -> Vec<f64> {
                curves.iter().map(|c| f(&c[i])).collect()
            };
            let (cum_loss_mean, cum_loss_std) = mean_std(&col(&|r| r.cum_loss));
            let (cum_time_ns_mean, cum_time_ns_std) = mean_std(&col(&|r| r.cum_time_ns as f64));
            AggregatePoint {
                round: first[i].round,
                cum_loss_mean,
                cum_loss_std,
                cum_time_ns_mean,
                cum_time_ns_std,
                proj_x_mean: mean_std(&col(&|r| r.proj_x as f64)).0,
                grad_q_mean: mean_std(&col(&|r| r.grad_q as f64)).0,
                val_q_mean: mean_std(&col(&|r| r.val_q as f64)).0,
            }
        })
        .collect()
}

/// Writes via a temporary sibling and a rename so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| BenchError::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(BenchError::io)?;
        f.write_all(bytes).map_err(BenchError::io)?;
        f.sync_all().map_err(BenchError::io)?;
    }
    fs::rename(&tmp, path).map_err(BenchError::io)
}

pub fn curve_csv(rows: &[CurveRow]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| BenchError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| BenchError::Io(e.to_string()))
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>, BenchError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::Io(e.to_string()))?;
    r.deserialize()
        .collect::<Result<Vec<CurveRow>, _>>()
        .map_err(|e| BenchError::Io(e.to_string()))
}

/// Writes CSVs, the JSON report and the plot script into `out`.
pub fn write_outputs(
    cfg: &BenchConfig,
    algorithms: &[ResolvedAlgorithm],
    results: Vec<JobResult>,
    out: &Path,
) -> Result<BenchReport, BenchError> {
    let runs_dir = out.join(RUNS_DIR);
    fs::create_dir_all(&runs_dir).map_err(BenchError::io)?;

    let mut reports = Vec::new();
    for alg in algorithms {
        let mut runs = Vec::new();
        let mut curves = Vec::new();
        for job in results.iter().filter(|j| j.label == alg.label) {
            match &job.outcome {
                Ok((run, adaptive)) => {
                    let rows = run.curve(cfg.record_every);
                    let name = csv_name(&alg.label, job.seed);
                    write_atomic(&runs_dir.join(&name), &curve_csv(&rows)?)?;
                    let (p, g, v) = run.counters.totals();
                    runs.push(RunReport {
                        seed: job.seed,
                        status: RunStatus::Ok,
                        error: None,
                        csv: Some(format!("{RUNS_DIR}/{name}")),
                        final_cum_loss: run.regret.cumulative_loss.last().copied(),
                        dynamic_regret: Some(run.regret.dynamic_regret),
                        path_length: Some(run.regret.path_length),
                        comparator_loss: Some(run.regret.comparator_loss),
                        total_time_ns: run.regret.wall_time_ns.last().copied(),
                        projections_onto_x: Some(p),
                        gradient_queries: Some(g),
                        value_queries: Some(v),
                        markers: run.diagnostics.markers.clone(),
                        adaptive_regret: adaptive.clone(),
                    });
                    curves.push(rows);
                }
                Err(e) => runs.push(RunReport {
                    seed: job.seed,
                    status: RunStatus::Failed,
                    error: Some(e.to_string()),
                    csv: None,
                    final_cum_loss: None,
                    dynamic_regret: None,
                    path_length: None,
                    comparator_loss: None,
                    total_time_ns: None,
                    projections_onto_x: None,
                    gradient_queries: None,
                    value_queries: None,
                    markers: Vec::new(),
                    adaptive_regret: None,
                }),
            }
        }
        reports.push(AlgorithmReport {
            label: alg.label.clone(),
            config: alg.config.clone(),
            runs,
            aggregate: aggregate(&curves),
        });
    }

    let informational = informational(&reports);
    let canonical = cfg.canonical();
    let report = BenchReport {
        metadata: Metadata {
            config_hash: crate::config::config_hash(&canonical),
            config: canonical,
            version: env!("CARGO_PKG_VERSION").to_string(),
            constants: cfg.constants(),
            record_every: cfg.record_every,
            timing: "monotonic nanoseconds spent inside the learner's round call".into(),
            notes: vec![
                "features uniform in the origin-centred ball of radius D/2; label noise uniform on [0, noise_max)".into(),
                "dynamic regret compares against the ground-truth parameter of each round".into(),
                "baseline_adaptive_multiproj runs the efficient adaptive learner's SOGD and Adapt-ML-Prod layers directly on X, one projection per awake learner; it stands in for SACS, which uses AdaNormalHedge".into(),
                "baseline_ader runs every OGD expert on X, one projection per expert".into(),
            ],
        },
        algorithms: reports,
        informational,
    };
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| BenchError::Io(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&out.join(REPORT_FILE), &json)?;
    write_atomic(&out.join(PLOT_FILE), PLOT_SCRIPT.as_bytes())?;
    Ok(report)
}

fn informational(reports: &[AlgorithmReport]) -> Informational {
    let last = |r: &AlgorithmReport| r.aggregate.last().cloned();
    let reference = reports.first();
    let mut wall_clock_ratio = BTreeMap::new();
    let mut projection_ratio = BTreeMap::new();
    if let Some(base) = reference.and_then(last) {
        for r in reports {
            if let Some(p) = last(r) {
                if base.cum_time_ns_mean > 0.0 {
                    wall_clock_ratio.insert(r.label.clone(), p.cum_time_ns_mean / base.cum_time_ns_mean);
                }
                if base.proj_x_mean > 0.0 {
                    projection_ratio.insert(r.label.clone(), p.proj_x_mean / base.proj_x_mean);
                }
            }
        }
    }
    Informational {
        reference: reference.map(|r| r.label.clone()).unwrap_or_default(),
        wall_clock_ratio,
        projection_ratio,
    }
}

/// Location of a run CSV relative to the output directory.
pub fn csv_path(out: &Path, label: &str, seed: u64) -> PathBuf {
    out.join(RUNS_DIR).join(csv_name(label, seed))
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot mean cumulative loss and running time from runs/*.csv.

Usage: python3 plot.py [output_dir]
"""
import csv
import glob
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(out):
    curves = defaultdict(list)
    for path in sorted(glob.glob(os.path.join(out, "runs", "*.csv"))):
        label = os.path.basename(path).rsplit("__seed", 1)[0]
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        curves[label].append(rows)
    return curves


def mean_curve(runs, column):
    n = len(runs)
    rounds = [int(r["round"]) for r in runs[0]]
    values = [sum(float(run[i][column]) for run in runs) / n for i in range(len(rounds))]
    return rounds, values


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    curves = load(out)
    for column, ylabel, name in [
        ("cum_loss", "cumulative loss", "loss.png"),
        ("cum_time_ns", "running time (s)", "time.png"),
    ]:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, runs in sorted(curves.items()):
            rounds, values = mean_curve(runs, column)
            if column == "cum_time_ns":
                values = [v / 1e9 for v in values]
            ax.plot(rounds, values, label=label)
        ax.set_xlabel("round")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(out, name), dpi=150)
        print("wrote", os.path.join(out, name))


if __name__ == "__main__":
    main()
"#;
