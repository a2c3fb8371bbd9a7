//! Self-checks run by the `verify` subcommand.

use crate::error::Result;
use crate::linalg;
use crate::metrics;
use crate::problems::{
    generate_problem, BilinearParams, FiniteSumProblem, GeneratorParams, QuadraticParams,
    WganParams,
};
use crate::rng::SeededRng;
use crate::sampling::{self, Regime, SamplingStrategy};
use crate::schedules::{RuleKind, ScheduleSpec, StepSizePair, TheoremRegime};
use crate::solvers::{epoch_drift, SolverKind};

use super::config::{ExperimentConfig, InitialPoint, ProblemSpec};
use super::csv_io::to_csv_string;
use super::run::run_experiment;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random points per problem kind for the variance bound.
    pub points: usize,
    /// Sampled permutations for the drift bound.
    pub permutations: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            points: 1000,
            permutations: 1000,
        }
    }
}

pub fn run_verification(opts: VerifyOptions) -> Result<VerifyReport> {
    let checks = vec![
        sample_variance_check(opts)?,
        variance_bound_check(opts)?,
        prefix_bound_check(opts)?,
        drift_bound_check(opts)?,
        determinism_check(opts)?,
    ];
    Ok(VerifyReport { checks })
}

/// Closed-form without-replacement variance against subset enumeration.
pub fn sample_variance_check(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = SeededRng::derived(opts.seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        for n in 2..=6 {
            let dim = 1 + rng.below(4);
            let pop: Vec<Vec<f64>> = (0..n).map(|_| rng.normal_vec(dim)).collect();
            for d in 1..=n {
                let exact = sampling::wr_sample_variance(&pop, d)?;
                let brute = sampling::wr_sample_variance_enumerated(&pop, d)?;
                worst = worst.max((exact - brute).abs());
            }
        }
    }
    Ok(CheckOutcome {
        name: "sample-variance",
        passed: worst <= 1e-12,
        detail: format!("max |closed form - enumeration| = {worst:e}"),
    })
}

/// The three generated kinds at `n = 20` with a 10-dimensional block.
pub fn bound_test_problems(seed: u64) -> Result<Vec<FiniteSumProblem>> {
    let kinds = [
        GeneratorParams::QuadraticScsc(QuadraticParams {
            n: 20,
            d: 10,
            mu: 1.0,
            l: 5.0,
            zero_offsets: false,
        }),
        GeneratorParams::Bilinear(BilinearParams {
            n: 20,
            d: 10,
            lambda_min_plus: 1.0,
            l_max: 5.0,
            zero_offsets: false,
        }),
        GeneratorParams::WganToy(WganParams {
            d: 10,
            n: 20,
            mean: (0..10).map(|i| i as f64 * 0.5).collect(),
            scale: 0.1,
        }),
    ];
    kinds.iter().map(|p| generate_problem(p, seed)).collect()
}

/// Per-component spread bound at random points.
pub fn variance_bound_check(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = SeededRng::derived(opts.seed, 2);
    let mut worst = f64::INFINITY;
    for problem in bound_test_problems(opts.seed)? {
        for _ in 0..opts.points {
            let radius = 10f64.powf(rng.uniform_in(-2.0, 2.0));
            let mut z = problem.solution_set().point().to_vec();
            linalg::axpy(radius, &rng.normal_vec(problem.dim()), &mut z);
            let r = metrics::variance_bound_residual(&problem, &z)?;
            let scale = metrics::variance_bound_scale(&problem, &z)?;
            worst = worst.min(r / scale);
        }
    }
    Ok(CheckOutcome {
        name: "variance-bound",
        passed: worst >= -1e-9,
        detail: format!("min residual / scale = {worst:e}"),
    })
}

/// Prefix-mean deviation bound by exact enumeration on small problems.
pub fn prefix_bound_check(opts: VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = SeededRng::derived(opts.seed, 3);
    let mut worst = f64::INFINITY;
    for (i, n) in [2usize, 5, 8].into_iter().enumerate() {
        let params = GeneratorParams::QuadraticScsc(QuadraticParams {
            n,
            d: 3,
            mu: 1.0,
            l: 4.0,
            zero_offsets: false,
        });
        let problem = generate_problem(&params, opts.seed.wrapping_add(i as u64))?;
        for _ in 0..20 {
            let z = rng.normal_vec(problem.dim());
            for d in 1..=n {
                let (lhs, rhs) = metrics::prefix_deviation_bound(&problem, &z, d)?;
                worst = worst.min((rhs - lhs) / (1.0 + rhs));
            }
        }
    }
    Ok(CheckOutcome {
        name: "prefix-bound",
        passed: worst >= -1e-12,
        detail: format!("min (rhs - lhs) / (1 + rhs) = {worst:e}"),
    })
}

/// Empirical and closed-form sides of the one-epoch drift bound.
#[derive(Debug, Clone, Copy)]
pub struct DriftMeasurement {
    pub empirical: f64,
    pub bound: f64,
    pub gamma1: f64,
}

/// Mean drift over `permutations` reshuffled epochs from a fixed random
/// start, with `gamma1 = 1 / (3 sqrt(2 n (n-1)) L_max)` and `gamma2 = 2 gamma1`.
pub fn measure_drift(
    problem: &FiniteSumProblem,
    permutations: usize,
    seed: u64,
) -> Result<DriftMeasurement> {
    let c = problem.constants()?;
    let n = problem.n() as f64;
    let gamma1 = 1.0 / (3.0 * (2.0 * n * (n - 1.0)).sqrt() * c.l_max);
    let steps = StepSizePair::new(gamma1, 2.0 * gamma1)?;
    let z0 = SeededRng::derived(seed, 4).normal_vec(problem.dim());
    let mut strategy = SamplingStrategy::new(Regime::RandomReshuffle, problem.n(), seed)?;
    let mut total = 0.0;
    for k in 0..permutations {
        let order = strategy.epoch_order(k as u64)?;
        total += epoch_drift(problem, &z0, &order, steps)?;
    }
    let g2 = gamma1 * gamma1;
    let bound = (10.0 * n * n * c.l * c.l + c.a * (25.0 + n)) * g2 * problem.dist_sq(&z0)
        + 2.0 * (n + 25.0) * g2 * c.sigma_star_sq;
    Ok(DriftMeasurement {
        empirical: total / permutations as f64,
        bound,
        gamma1,
    })
}

pub fn drift_bound_check(opts: VerifyOptions) -> Result<CheckOutcome> {
    let params = GeneratorParams::QuadraticScsc(QuadraticParams {
        n: 8,
        d: 4,
        mu: 1.0,
        l: 2.0,
        zero_offsets: false,
    });
    let problem = generate_problem(&params, opts.seed)?;
    let m = measure_drift(&problem, opts.permutations, opts.seed)?;
    Ok(CheckOutcome {
        name: "drift-bound",
        passed: m.empirical <= m.bound,
        detail: format!("empirical {:e} <= bound {:e}", m.empirical, m.bound),
    })
}

/// Same configuration twice gives identical CSV bytes.
pub fn determinism_check(opts: VerifyOptions) -> Result<CheckOutcome> {
    let cfg = ExperimentConfig {
        problem: ProblemSpec {
            params: GeneratorParams::QuadraticScsc(QuadraticParams {
                n: 10,
                d: 3,
                mu: 1.0,
                l: 3.0,
                zero_offsets: false,
            }),
            seed: opts.seed,
        },
        solver: SolverKind::Seg,
        sampling: Regime::RandomReshuffle,
        schedule: ScheduleSpec::new(RuleKind::TheoremConstant)
            .with_regime(TheoremRegime::StronglyMonotone),
        epochs: 30,
        seeds: vec![1, 2, 3],
        metrics: vec![metrics::Metric::RelativeError, metrics::Metric::GradNormSq],
        output: None,
        z0: InitialPoint::Normal,
        per_iteration: false,
    };
    cfg.validate()?;
    let a = to_csv_string(&run_experiment(&cfg)?);
    let b = to_csv_string(&run_experiment(&cfg)?);
    Ok(CheckOutcome {
        name: "determinism",
        passed: a == b,
        detail: format!("{} bytes compared", a.len()),
    })
}
