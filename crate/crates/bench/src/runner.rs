//! Online loop for one (algorithm, seed) pair and the parallel grid.

use std::time::Instant;

use nonstat_oco::algorithms::{build_learner, AlgorithmConfig, Diagnostics};
use nonstat_oco::environment::{generate_stream, EnvironmentConfig, Sample};
use nonstat_oco::metrics::{adaptive_regret_bruteforce, dynamic_regret, AdaptiveRegret, RegretReport};
use nonstat_oco::oracle::{ComplexityCounters, CountingOracle, RoundCounts, SampleFeedback};
use nonstat_oco::{DecisionVector, Domain};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, ResolvedAlgorithm};
use crate::BenchError;

/// One CSV row: cumulative values after `round`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub round: usize,
    pub cum_loss: f64,
    pub cum_time_ns: u64,
    #[serde(rename = "proj_X")]
    pub proj_x: u64,
    pub grad_q: u64,
    pub val_q: u64,
}

/// Everything observed in one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub samples: Vec<Sample>,
    /// Decisions `x_1..x_T` submitted before each round.
    pub decisions: Vec<DecisionVector>,
    /// `Σ_{s≤t} f_s(u_s)` for the ground-truth comparators.
    pub cumulative_comparator_loss: Vec<f64>,
    pub regret: RegretReport,
    pub counters: ComplexityCounters,
    pub diagnostics: Diagnostics,
}

impl RunOutcome {
    /// `Σ_{s≤t} f_s(x_s) − Σ_{s≤t} f_s(u_s)` for 1-based `t`.
    pub fn regret_at(&self, t: usize) -> f64 {
        self.regret.cumulative_loss[t - 1] - self.cumulative_comparator_loss[t - 1]
    }

    /// Rows at every `stride`-th round and at the final round.
    pub fn curve(&self, stride: usize) -> Vec<CurveRow> {
        let t_total = self.decisions.len();
        let mut rows = Vec::new();
        let mut acc = RoundCounts::default();
        for (i, c) in self.counters.per_round.iter().enumerate() {
            acc.projections += c.projections;
            acc.gradients += c.gradients;
            acc.values += c.values;
            let round = i + 1;
            if round % stride == 0 || round == t_total {
                rows.push(CurveRow {
                    round,
                    cum_loss: self.regret.cumulative_loss[i],
                    cum_time_ns: self.regret.wall_time_ns[i],
                    proj_x: acc.projections,
                    grad_q: acc.gradients,
                    val_q: acc.values,
                });
            }
        }
        rows
    }
}

/// Runs `alg` on the stream of `env` with the given seed.
pub fn run_one(
    env: &EnvironmentConfig,
    alg: &AlgorithmConfig,
    seed: u64,
) -> Result<RunOutcome, BenchError> {
    let env = EnvironmentConfig {
        seed,
        ..env.clone()
    };
    let samples = generate_stream(&env).map_err(BenchError::runtime)?;
    run_on_samples(&env.domain, alg, samples)
}

/// Runs `alg` on a fixed stream.
pub fn run_on_samples(
    domain: &Domain,
    alg: &AlgorithmConfig,
    samples: Vec<Sample>,
) -> Result<RunOutcome, BenchError> {
    let mut learner = build_learner(alg, domain).map_err(BenchError::runtime)?;
    let mut decisions = Vec::with_capacity(samples.len());
    let mut counters = ComplexityCounters::default();
    let mut wall = Vec::with_capacity(samples.len());
    let mut elapsed: u64 = 0;
    for (i, s) in samples.iter().enumerate() {
        let x = learner.decision().clone();
        let proj_before = learner.projections_onto_x();
        let fb = CountingOracle::new(SampleFeedback {
            round: i + 1,
            sample: s,
            point: &x,
        });
        let start = Instant::now();
        learner.round(&fb).map_err(BenchError::runtime)?;
        elapsed += start.elapsed().as_nanos() as u64;
        wall.push(elapsed);
        let (grads, values) = fb.counts();
        counters.record_round(RoundCounts {
            projections: learner.projections_onto_x() - proj_before,
            gradients: grads,
            values,
        });
        decisions.push(x);
    }
    let targets: Vec<DecisionVector> = samples.iter().map(|s| s.target.clone()).collect();
    let mut regret = dynamic_regret(&decisions, &targets, |t, w| samples[t].loss(w))
        .map_err(BenchError::runtime)?;
    regret.wall_time_ns = wall;
    let mut cumulative_comparator_loss = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (s, u) in samples.iter().zip(&targets) {
        acc += s.loss(u);
        cumulative_comparator_loss.push(acc);
    }
    Ok(RunOutcome {
        diagnostics: learner.diagnostics(),
        samples,
        decisions,
        cumulative_comparator_loss,
        regret,
        counters,
    })
}

/// Result of one grid cell; failures are kept rather than aborting the grid.
#[derive(Debug)]
pub struct JobResult {
    pub label: String,
    pub seed: u64,
    pub outcome: Result<(RunOutcome, Option<AdaptiveRegret>), BenchError>,
}

/// Runs every (algorithm, seed) pair on a pool of `jobs` threads. Results
/// come back in config order.
pub fn run_grid(
    cfg: &BenchConfig,
    algorithms: &[ResolvedAlgorithm],
    jobs: usize,
) -> Result<Vec<JobResult>, BenchError> {
    let pairs: Vec<(&ResolvedAlgorithm, u64)> = algorithms
        .iter()
        .flat_map(|a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Runtime(e.to_string()))?;
    let min_len = cfg.adaptive_regret.map(|a| a.min_len);
    Ok(pool.install(|| {
        pairs
            .par_iter()
            .map(|(alg, seed)| {
                let outcome = run_one(&cfg.environment, &alg.config, *seed).and_then(|run| {
                    let adaptive = match min_len {
                        Some(m) => Some(
                            adaptive_regret_bruteforce(
                                &run.decisions,
                                &run.samples,
                                &cfg.environment.domain,
                                m,
                            )
                            .map_err(BenchError::runtime)?,
                        ),
                        None => None,
                    };
                    Ok((run, adaptive))
                });
                JobResult {
                    label: alg.label.clone(),
                    seed: *seed,
                    outcome,
                }
            })
            .collect()
    }))
}
