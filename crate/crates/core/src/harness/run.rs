//! Multi-seed execution and aggregation.

use std::thread;

use crate::error::Result;
use crate::metrics::Metric;
use crate::problems::FiniteSumProblem;
use crate::sampling::SamplingStrategy;
use crate::solvers::{run_solver, RunFailure, RunOptions, TrajectoryRecord};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    /// Epoch, or global inner-iteration count in per-iteration mode.
    pub epoch: u64,
    pub metric: Metric,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub nruns: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateRecord {
    pub metrics: Vec<Metric>,
    pub rows: Vec<AggregateRow>,
    /// Seeds whose run failed; they do not contribute to the rows.
    pub failures: Vec<SeedFailure>,
}

impl AggregateRecord {
    /// Mean series of one metric, in row order.
    pub fn series(&self, metric: Metric) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| r.mean)
            .collect()
    }

    pub fn nruns(&self) -> usize {
        self.rows.first().map_or(0, |r| r.nruns)
    }

    /// True when every seed failed.
    pub fn all_failed(&self) -> bool {
        !self.failures.is_empty() && self.nruns() == 0
    }
}

/// Outcome of one seed.
pub type SeedRun = (u64, Result<TrajectoryRecord, RunFailure>);

/// Runs every seed of `cfg` on `problem`, concurrently, returning results in
/// seed order.
pub fn run_seeds(cfg: &ExperimentConfig, problem: &FiniteSumProblem) -> Result<Vec<SeedRun>> {
    let schedule = cfg.build_schedule(problem)?;
    let z0 = cfg.initial_point(problem);
    let options = RunOptions {
        epochs: cfg.epochs,
        weighted_average: cfg.metrics.iter().any(|m| m.needs_weighted_average()),
        per_iteration: cfg.per_iteration,
    };
    let one = |seed: u64| -> Result<TrajectoryRecord, RunFailure> {
        let mut strategy =
            SamplingStrategy::new(cfg.sampling, problem.n(), seed).map_err(|e| RunFailure {
                error: e,
                partial: TrajectoryRecord {
                    solver: cfg.solver,
                    rows: Vec::new(),
                    final_z: z0.clone(),
                },
            })?;
        run_solver(problem, cfg.solver, &mut strategy, &schedule, &z0, options)
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    let mut out = Vec::with_capacity(cfg.seeds.len());
    for chunk in cfg.seeds.chunks(workers) {
        let results: Vec<_> = thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&seed| s.spawn(move || one(seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("seed worker panicked"))
                .collect()
        });
        out.extend(chunk.iter().copied().zip(results));
    }
    Ok(out)
}

/// Elementwise mean and sample standard deviation over successful runs.
pub fn aggregate(
    metrics: &[Metric],
    runs: &[SeedRun],
    n: usize,
    per_iteration: bool,
) -> AggregateRecord {
    let ok: Vec<&TrajectoryRecord> = runs.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let failures = runs
        .iter()
        .filter_map(|(seed, r)| {
            r.as_ref().err().map(|f| SeedFailure {
                seed: *seed,
                message: f.error.to_string(),
            })
        })
        .collect();
    let mut rows = Vec::new();
    if let Some(first) = ok.first() {
        let m = ok.len();
        for (idx, row) in first.rows.iter().enumerate() {
            let epoch = if per_iteration {
                row.epoch * n as u64 + row.inner as u64
            } else {
                row.epoch
            };
            for &metric in metrics {
                let values: Vec<f64> = ok
                    .iter()
                    .map(|r| r.rows[idx].get(metric).unwrap_or(f64::NAN))
                    .collect();
                let mean = values.iter().sum::<f64>() / m as f64;
                let std = if m > 1 {
                    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                rows.push(AggregateRow {
                    epoch,
                    metric,
                    mean,
                    std,
                    nruns: m,
                });
            }
        }
    }
    AggregateRecord {
        metrics: metrics.to_vec(),
        rows,
        failures,
    }
}

/// Generates the problem, runs all seeds and aggregates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateRecord> {
    let problem = cfg.build_problem()?;
    let runs = run_seeds(cfg, &problem)?;
    Ok(aggregate(
        &cfg.metrics,
        &runs,
        problem.n(),
        cfg.per_iteration,
    ))
}
