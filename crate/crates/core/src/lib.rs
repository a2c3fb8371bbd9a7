//! Stochastic extragradient for finite-sum variational inequalities.
//!
//! The crate covers affine finite-sum operators `F = (1/n) sum F_i`, the
//! same-sample extragradient method under random reshuffling, shuffle-once,
//! incremental and with-replacement sampling, the step-size rules with
//! convergence guarantees, and an experiment harness that aggregates
//! seeded runs into CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod sampling;
pub mod schedules;
pub mod solvers;

pub use error::{Error, Result};
pub use problems::{
    ComponentOperator, FiniteSumProblem, GeneratorParams, ProblemConstants, SolutionSet,
};
pub use sampling::{Regime, SamplingStrategy};
pub use schedules::{Schedule, ScheduleSpec, StepSizePair, TheoremRegime};
pub use solvers::{run_solver, RunOptions, SolverKind, TrajectoryRecord};
