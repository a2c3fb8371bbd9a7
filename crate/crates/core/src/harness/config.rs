//! Experiment configuration documents.
//!
//! ```json
//! {
//!   "problem": {"kind": "quadratic-scsc", "params": {"n": 100, "d": 20, "mu": 1, "L": 10}, "seed": 7},
//!   "solver": "SEG",
//!   "sampling": "RR",
//!   "schedule": {"rule": "theorem-constant", "regime": "strongly-monotone"},
//!   "K": 200,
//!   "seeds": [1, 2, 3, 4, 5],
//!   "metrics": ["relative_error"],
//!   "output": "out.csv",
//!   "z0": "normal",
//!   "per_iteration": false
//! }
//! ```
//!
//! Unknown keys are rejected everywhere. `metrics` defaults to
//! `["relative_error"]`; `z0` is `"normal"` (a standard normal draw tied to
//! the problem seed), `"zeros"`, or `{"point": [...]}`.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::problems::{generate_problem, FiniteSumProblem, GeneratorParams, ProblemKind};
use crate::rng::SeededRng;
use crate::sampling::Regime;
use crate::schedules::{Schedule, ScheduleSpec};
use crate::solvers::SolverKind;

/// Stream label for the default initial point.
const Z0_STREAM: u64 = 0x7a30;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialPoint {
    #[default]
    Normal,
    Zeros,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub params: GeneratorParams,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        self.params.kind()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    pub sampling: Regime,
    pub schedule: ScheduleSpec,
    pub epochs: u64,
    pub seeds: Vec<u64>,
    pub metrics: Vec<Metric>,
    pub output: Option<PathBuf>,
    pub z0: InitialPoint,
    pub per_iteration: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: ProblemKind,
    params: serde_json::Value,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    solver: SolverKind,
    sampling: Regime,
    schedule: ScheduleSpec,
    #[serde(rename = "K")]
    epochs: u64,
    seeds: Vec<u64>,
    #[serde(default = "default_metrics")]
    metrics: Vec<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(default)]
    z0: InitialPoint,
    #[serde(default)]
    per_iteration: bool,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::RelativeError]
}

/// Parses and validates a configuration document.
///
/// Beyond the schema this generates the problem and builds the schedule, so
/// a rule whose precondition the problem violates is reported here.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| Error::Parse(e.to_string()))?;
    let params =
        GeneratorParams::from_json(raw.problem.kind, &raw.problem.params, "problem.params")?;
    let cfg = ExperimentConfig {
        problem: ProblemSpec {
            params,
            seed: raw.problem.seed,
        },
        solver: raw.solver,
        sampling: raw.sampling,
        schedule: raw.schedule,
        epochs: raw.epochs,
        seeds: raw.seeds,
        metrics: raw.metrics,
        output: raw.output,
        z0: raw.z0,
        per_iteration: raw.per_iteration,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Checks invariants and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::config(
                "seeds",
                format!("seed {dup} appears more than once"),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::config("K", "K must be at least 1"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.metrics.iter().find(|m| !seen.insert(**m)) {
            return Err(Error::config(
                "metrics",
                format!("metric {} listed twice", dup.name()),
            ));
        }
        if self.metrics.contains(&Metric::GeneratorDist)
            && self.problem.kind() != ProblemKind::WganToy
        {
            return Err(Error::config(
                "metrics",
                "generator_dist is defined for wgan-toy problems only",
            ));
        }
        let problem = self.build_problem()?;
        if let InitialPoint::Point(p) = &self.z0 {
            if p.len() != problem.dim() {
                return Err(Error::config(
                    "z0.point",
                    format!("expected {} coordinates, got {}", problem.dim(), p.len()),
                ));
            }
        }
        self.build_schedule(&problem)?;
        Ok(())
    }

    pub fn build_problem(&self) -> Result<FiniteSumProblem> {
        generate_problem(&self.problem.params, self.problem.seed).map_err(|e| match e {
            Error::Parameter(m) | Error::Validation(m) => Error::config("problem.params", m),
            other => other,
        })
    }

    pub fn build_schedule(&self, problem: &FiniteSumProblem) -> Result<Schedule> {
        let constants = problem.constants()?;
        self.schedule
            .build(constants, problem.n(), self.epochs)
            .map_err(|e| match e {
                Error::RegimeMismatch(m) => Error::config(
                    "schedule.regime",
                    format!("{m} (set \"unchecked\": true with an explicit gamma1 to run anyway)"),
                ),
                Error::Parameter(m) => Error::config("schedule", m),
                other => other,
            })
    }

    pub fn initial_point(&self, problem: &FiniteSumProblem) -> Vec<f64> {
        match &self.z0 {
            InitialPoint::Normal => {
                SeededRng::derived(self.problem.seed, Z0_STREAM).normal_vec(problem.dim())
            }
            InitialPoint::Zeros => vec![0.0; problem.dim()],
            InitialPoint::Point(p) => p.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            problem: RawProblem {
                kind: self.problem.kind(),
                params: self.problem.params.to_json(),
                seed: self.problem.seed,
            },
            solver: self.solver,
            sampling: self.sampling,
            schedule: self.schedule.clone(),
            epochs: self.epochs,
            seeds: self.seeds.clone(),
            metrics: self.metrics.clone(),
            output: self.output.clone(),
            z0: self.z0.clone(),
            per_iteration: self.per_iteration,
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }
}
