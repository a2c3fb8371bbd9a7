//! Epoch kernels for same-sample extragradient, SGDA and optimistic mirror
//! descent, plus the driver that runs them and records metrics.
//!
//! Inner step `i` of an extragradient epoch with component `j = order[i]`:
//!
//! ```text
//! z_bar = z - gamma2 * F_j(z)
//! z     = z - gamma1 * F_j(z_bar)
//! ```
//!
//! OMD keeps the previous stochastic gradient `g_prev` (zero at a cold start)
//! and steps `z = z - 2 gamma1 g + gamma1 g_prev` with `g = F_j(z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::{self, MetricRow};
use crate::problems::{ComponentOperator, FiniteSumProblem};
use crate::sampling::SamplingStrategy;
use crate::schedules::{Schedule, StepSizePair};

/// Growth factor that triggers the divergence guard.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "SEG")]
    Seg,
    #[serde(rename = "SGDA")]
    Sgda,
    #[serde(rename = "OMD")]
    Omd,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Seg => "SEG",
            SolverKind::Sgda => "SGDA",
            SolverKind::Omd => "OMD",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SolverKind::Seg, SolverKind::Sgda, SolverKind::Omd]
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown solver `{s}`")))
    }
}

struct Guard {
    limit: f64,
    epoch: u64,
}

impl Guard {
    fn new(z_in: &[f64], epoch: u64) -> Self {
        Self {
            limit: DIVERGENCE_FACTOR * (1.0 + linalg::norm(z_in)),
            epoch,
        }
    }

    fn check(&self, z: &[f64], inner: usize) -> Result<()> {
        let norm = linalg::norm(z);
        if norm.is_finite() && norm <= self.limit {
            Ok(())
        } else {
            Err(Error::Diverged {
                epoch: self.epoch,
                inner,
                norm,
            })
        }
    }
}

fn check_shapes<O: ComponentOperator + ?Sized>(op: &O, z: &[f64], order: &[usize]) -> Result<()> {
    if z.len() != op.dim() {
        return Err(Error::contract(format!(
            "iterate has dimension {}, operator has {}",
            z.len(),
            op.dim()
        )));
    }
    if let Some(bad) = order.iter().find(|&&j| j >= op.num_components()) {
        return Err(Error::contract(format!(
            "order contains index {bad} but n = {}",
            op.num_components()
        )));
    }
    Ok(())
}

/// Scratch buffers reused across epochs.
#[derive(Debug, Clone)]
pub struct Workspace {
    g: Vec<f64>,
    z_bar: Vec<f64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            g: vec![0.0; dim],
            z_bar: vec![0.0; dim],
        }
    }
}

/// One extragradient epoch in place; `steps(i)` gives the pair for inner step `i`.
pub fn seg_epoch_in_place<O, S>(
    op: &O,
    z: &mut [f64],
    order: &[usize],
    steps: S,
    epoch: u64,
    ws: &mut Workspace,
) -> Result<()>
where
    O: ComponentOperator + ?Sized,
    S: Fn(usize) -> StepSizePair,
{
    check_shapes(op, z, order)?;
    let guard = Guard::new(z, epoch);
    for (i, &j) in order.iter().enumerate() {
        let s = steps(i);
        op.apply_component(j, z, &mut ws.g);
        ws.z_bar.copy_from_slice(z);
        linalg::axpy(-s.gamma2, &ws.g, &mut ws.z_bar);
        op.apply_component(j, &ws.z_bar, &mut ws.g);
        linalg::axpy(-s.gamma1, &ws.g, z);
        guard.check(z, i)?;
    }
    Ok(())
}

pub fn seg_epoch<O: ComponentOperator + ?Sized>(
    op: &O,
    z_in: &[f64],
    order: &[usize],
    steps: StepSizePair,
) -> Result<Vec<f64>> {
    let mut z = z_in.to_vec();
    seg_epoch_in_place(
        op,
        &mut z,
        order,
        |_| steps,
        0,
        &mut Workspace::new(op.dim()),
    )?;
    Ok(z)
}

/// One SGDA epoch in place; only `gamma1` is used.
pub fn sgda_epoch_in_place<O, S>(
    op: &O,
    z: &mut [f64],
    order: &[usize],
    steps: S,
    epoch: u64,
    ws: &mut Workspace,
) -> Result<()>
where
    O: ComponentOperator + ?Sized,
    S: Fn(usize) -> StepSizePair,
{
    check_shapes(op, z, order)?;
    let guard = Guard::new(z, epoch);
    for (i, &j) in order.iter().enumerate() {
        op.apply_component(j, z, &mut ws.g);
        linalg::axpy(-steps(i).gamma1, &ws.g, z);
        guard.check(z, i)?;
    }
    Ok(())
}

pub fn sgda_epoch<O: ComponentOperator + ?Sized>(
    op: &O,
    z_in: &[f64],
    order: &[usize],
    steps: StepSizePair,
) -> Result<Vec<f64>> {
    let mut z = z_in.to_vec();
    sgda_epoch_in_place(
        op,
        &mut z,
        order,
        |_| steps,
        0,
        &mut Workspace::new(op.dim()),
    )?;
    Ok(z)
}

/// Iterate plus the last stochastic gradient, carried across OMD epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct OmdState {
    pub z: Vec<f64>,
    pub memory: Vec<f64>,
}

impl OmdState {
    /// Cold start with zero memory.
    pub fn new(z: Vec<f64>) -> Self {
        let memory = vec![0.0; z.len()];
        Self { z, memory }
    }
}

/// One OMD epoch in place; the step is `gamma1`.
pub fn omd_epoch_in_place<O, S>(
    op: &O,
    state: &mut OmdState,
    order: &[usize],
    steps: S,
    epoch: u64,
    ws: &mut Workspace,
) -> Result<()>
where
    O: ComponentOperator + ?Sized,
    S: Fn(usize) -> StepSizePair,
{
    check_shapes(op, &state.z, order)?;
    if state.memory.len() != state.z.len() {
        return Err(Error::contract("OMD memory and iterate differ in length"));
    }
    let guard = Guard::new(&state.z, epoch);
    for (i, &j) in order.iter().enumerate() {
        let gamma = steps(i).gamma1;
        op.apply_component(j, &state.z, &mut ws.g);
        for ((z, g), m) in state.z.iter_mut().zip(&ws.g).zip(&state.memory) {
            *z += -2.0 * gamma * g + gamma * m;
        }
        state.memory.copy_from_slice(&ws.g);
        guard.check(&state.z, i)?;
    }
    Ok(())
}

pub fn omd_epoch<O: ComponentOperator + ?Sized>(
    op: &O,
    state: &OmdState,
    order: &[usize],
    steps: StepSizePair,
) -> Result<OmdState> {
    let mut next = state.clone();
    omd_epoch_in_place(
        op,
        &mut next,
        order,
        |_| steps,
        0,
        &mut Workspace::new(op.dim()),
    )?;
    Ok(next)
}

/// Running weighted average `sum_j G^-j z_j` over epoch-boundary iterates,
/// `j = 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct WeightedAverageState {
    base: f64,
    weight: f64,
    total_weight: f64,
    sum: Vec<f64>,
    count: u64,
}

impl WeightedAverageState {
    /// `base` is `G`; weights are `G^-j`.
    pub fn new(base: f64, dim: usize) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::param(format!(
                "weight base must be positive, got {base}"
            )));
        }
        Ok(Self {
            base,
            weight: 1.0,
            total_weight: 0.0,
            sum: vec![0.0; dim],
            count: 0,
        })
    }

    /// `G = 6 (A + 4 L^2 + 1)` for the given problem.
    pub fn for_problem(problem: &FiniteSumProblem) -> Result<Self> {
        let c = problem.constants()?;
        Self::new(6.0 * (c.a + 4.0 * c.l * c.l + 1.0), problem.dim())
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Adds `z_j`; `j` must be `count + 1`.
    pub fn update(&mut self, z: &[f64], j: u64) -> Result<()> {
        if j != self.count + 1 {
            return Err(Error::contract(format!(
                "weighted average expects term {}, got {j}",
                self.count + 1
            )));
        }
        if z.len() != self.sum.len() {
            return Err(Error::contract("weighted average dimension mismatch"));
        }
        self.weight /= self.base;
        if self.weight > 0.0 {
            linalg::axpy(self.weight, z, &mut self.sum);
            self.total_weight += self.weight;
        }
        self.count = j;
        Ok(())
    }

    /// `(1/k) sum_j G_j z_j`; `None` before the first term.
    pub fn literal(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| self.sum.iter().map(|s| s / self.count as f64).collect())
    }

    /// `sum_j G_j z_j / sum_j G_j`; `None` before the first term.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| self.sum.iter().map(|s| s / self.total_weight).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub epochs: u64,
    /// Track the weighted average and report its operator norms.
    pub weighted_average: bool,
    /// Record a row after every inner iteration instead of every epoch.
    pub per_iteration: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub solver: SolverKind,
    pub rows: Vec<MetricRow>,
    pub final_z: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn series(&self, metric: metrics::Metric) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.get(metric)).collect()
    }
}

/// Divergence (or another failure) with the rows recorded before it.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    #[source]
    pub error: Error,
    pub partial: TrajectoryRecord,
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

struct Recorder<'a> {
    problem: &'a FiniteSumProblem,
    z0_dist: f64,
    wavg: Option<WeightedAverageState>,
    rows: Vec<MetricRow>,
}

impl Recorder<'_> {
    fn record(&mut self, z: &[f64], z0: &[f64], epoch: u64, inner: usize) {
        let dist_sq = self.problem.dist_sq(z);
        let (lit, norm) = match &self.wavg {
            Some(w) => {
                let lit = w.literal().unwrap_or_else(|| z0.to_vec());
                let norm = w.normalized().unwrap_or_else(|| z0.to_vec());
                (
                    Some(metrics::grad_norm_sq(self.problem, &lit)),
                    Some(metrics::grad_norm_sq(self.problem, &norm)),
                )
            }
            None => (None, None),
        };
        self.rows.push(MetricRow {
            epoch,
            inner,
            relative_error: dist_sq / self.z0_dist,
            dist_sq,
            grad_norm_sq: metrics::grad_norm_sq(self.problem, z),
            wavg_grad_norm_sq: lit,
            wavg_normalized_grad_norm_sq: norm,
            generator_dist: metrics::generator_dist(self.problem, z),
        });
    }
}

/// Runs `options.epochs` epochs from `z0` and records metrics.
///
/// Rows are taken at epoch boundaries (`epochs + 1` rows, the first at
/// `z0`), or after every inner iteration with `per_iteration`. The weighted
/// average uses the convention that before any epoch completes it equals
/// `z0`.
pub fn run_solver(
    problem: &FiniteSumProblem,
    kind: SolverKind,
    strategy: &mut SamplingStrategy,
    schedule: &Schedule,
    z0: &[f64],
    options: RunOptions,
) -> Result<TrajectoryRecord, RunFailure> {
    let fail = |error: Error, rows: Vec<MetricRow>, z: &[f64]| RunFailure {
        error,
        partial: TrajectoryRecord {
            solver: kind,
            rows,
            final_z: z.to_vec(),
        },
    };
    if z0.len() != problem.dim() || strategy.n() != problem.n() {
        return Err(fail(
            Error::contract(format!(
                "dimensions disagree: z0 {}, problem {}, strategy n {} vs problem n {}",
                z0.len(),
                problem.dim(),
                strategy.n(),
                problem.n()
            )),
            Vec::new(),
            z0,
        ));
    }
    let z0_dist = problem.dist_sq(z0);
    if !(z0_dist > 0.0) {
        return Err(fail(
            Error::param("initial point lies in the solution set; relative error undefined"),
            Vec::new(),
            z0,
        ));
    }
    let wavg = if options.weighted_average {
        Some(WeightedAverageState::for_problem(problem).map_err(|e| fail(e, Vec::new(), z0))?)
    } else {
        None
    };
    let mut rec = Recorder {
        problem,
        z0_dist,
        wavg,
        rows: Vec::new(),
    };
    rec.record(z0, z0, 0, 0);

    let n = problem.n();
    let mut omd = OmdState::new(z0.to_vec());
    let mut ws = Workspace::new(problem.dim());
    let mut order = Vec::with_capacity(n);
    let mut single = [0usize; 1];
    for k in 0..options.epochs {
        if let Err(e) = strategy.epoch_order_into(k, &mut order) {
            return Err(fail(e, rec.rows, &omd.z));
        }
        let steps = |i: usize| schedule.at_inner(k, i);
        let result = if options.per_iteration {
            let guard = Guard::new(&omd.z, k);
            let mut out = Ok(());
            for (i, &j) in order.iter().enumerate() {
                single[0] = j;
                let step_i = |_: usize| steps(i);
                out = step(problem, kind, &mut omd, &single, step_i, k, &mut ws)
                    .and_then(|_| guard.check(&omd.z, i))
                    .map_err(|e| match e {
                        Error::Diverged { epoch, norm, .. } => Error::Diverged {
                            epoch,
                            inner: i,
                            norm,
                        },
                        other => other,
                    });
                if out.is_err() {
                    break;
                }
                if i + 1 < n {
                    rec.record(&omd.z, z0, k, i + 1);
                }
            }
            out
        } else {
            step(problem, kind, &mut omd, &order, steps, k, &mut ws)
        };
        if let Err(e) = result {
            return Err(fail(e, rec.rows, &omd.z));
        }
        if let Some(w) = rec.wavg.as_mut() {
            w.update(&omd.z, k + 1).expect("epochs are consecutive");
        }
        rec.record(&omd.z, z0, k + 1, 0);
    }
    Ok(TrajectoryRecord {
        solver: kind,
        rows: rec.rows,
        final_z: omd.z,
    })
}

fn step<S: Fn(usize) -> StepSizePair>(
    problem: &FiniteSumProblem,
    kind: SolverKind,
    state: &mut OmdState,
    order: &[usize],
    steps: S,
    epoch: u64,
    ws: &mut Workspace,
) -> Result<()> {
    match kind {
        SolverKind::Seg => seg_epoch_in_place(problem, &mut state.z, order, steps, epoch, ws),
        SolverKind::Sgda => sgda_epoch_in_place(problem, &mut state.z, order, steps, epoch, ws),
        SolverKind::Omd => omd_epoch_in_place(problem, state, order, steps, epoch, ws),
    }
}

/// `(1/n) sum_{j<n} ||z_j - z_0||^2` along one extragradient epoch.
pub fn epoch_drift<O: ComponentOperator + ?Sized>(
    op: &O,
    z0: &[f64],
    order: &[usize],
    steps: StepSizePair,
) -> Result<f64> {
    check_shapes(op, z0, order)?;
    let mut z = z0.to_vec();
    let mut ws = Workspace::new(op.dim());
    let mut total = 0.0;
    for &j in order {
        total += linalg::dist_sq(&z, z0);
        seg_epoch_in_place(op, &mut z, &[j], |_| steps, 0, &mut ws)?;
    }
    Ok(total / order.len().max(1) as f64)
}
