//! Convergence measures and checks of the variance inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::{FiniteSumProblem, GeneratorParams};

/// Quantities recorded per row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `dist(z, Z*)^2 / dist(z_0, Z*)^2`
    RelativeError,
    DistSq,
    /// `||F(z)||^2`
    GradNormSq,
    /// `||F(z~)||^2` for the weighted average with the `1/k` prefactor.
    WavgGradNormSq,
    /// `||F(z~)||^2` for the weighted average divided by its total weight.
    WavgNormalizedGradNormSq,
    /// Distance from the generator parameters to the data mean (WGAN toy only).
    GeneratorDist,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::RelativeError,
        Metric::DistSq,
        Metric::GradNormSq,
        Metric::WavgGradNormSq,
        Metric::WavgNormalizedGradNormSq,
        Metric::GeneratorDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RelativeError => "relative_error",
            Metric::DistSq => "dist_sq",
            Metric::GradNormSq => "grad_norm_sq",
            Metric::WavgGradNormSq => "wavg_grad_norm_sq",
            Metric::WavgNormalizedGradNormSq => "wavg_normalized_grad_norm_sq",
            Metric::GeneratorDist => "generator_dist",
        }
    }

    pub fn needs_weighted_average(self) -> bool {
        matches!(
            self,
            Metric::WavgGradNormSq | Metric::WavgNormalizedGradNormSq
        )
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub epoch: u64,
    /// Inner iteration within the epoch; 0 for epoch-boundary rows.
    pub inner: usize,
    pub relative_error: f64,
    pub dist_sq: f64,
    pub grad_norm_sq: f64,
    pub wavg_grad_norm_sq: Option<f64>,
    pub wavg_normalized_grad_norm_sq: Option<f64>,
    pub generator_dist: Option<f64>,
}

impl MetricRow {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::RelativeError => Some(self.relative_error),
            Metric::DistSq => Some(self.dist_sq),
            Metric::GradNormSq => Some(self.grad_norm_sq),
            Metric::WavgGradNormSq => self.wavg_grad_norm_sq,
            Metric::WavgNormalizedGradNormSq => self.wavg_normalized_grad_norm_sq,
            Metric::GeneratorDist => self.generator_dist,
        }
    }
}

pub fn relative_error(problem: &FiniteSumProblem, z: &[f64], z0: &[f64]) -> Result<f64> {
    let denom = problem.dist_sq(z0);
    if !(denom > 0.0) {
        return Err(Error::param(
            "initial point lies in the solution set; relative error undefined",
        ));
    }
    Ok(problem.dist_sq(z) / denom)
}

/// `||F(z)||^2` with the fixed-order mean.
pub fn grad_norm_sq(problem: &FiniteSumProblem, z: &[f64]) -> f64 {
    let mut out = vec![0.0; problem.dim()];
    problem.mean_into(z, &mut out);
    linalg::norm_sq(&out)
}

/// `||theta - m||` where `theta` is the generator half of `z` and `m` the
/// data mean of a WGAN toy problem.
pub fn generator_dist(problem: &FiniteSumProblem, z: &[f64]) -> Option<f64> {
    match problem.params()? {
        GeneratorParams::WganToy(p) => Some(linalg::dist_sq(&z[..p.d], &p.mean).sqrt()),
        _ => None,
    }
}

/// `A ||z - z*||^2 + 2 sigma*^2 - (1/n) sum ||F_i(z) - F(z)||^2`.
pub fn variance_bound_residual(problem: &FiniteSumProblem, z: &[f64]) -> Result<f64> {
    let c = problem.constants()?;
    let (lhs, _) = component_spread(problem, z);
    let rhs = c.a * problem.dist_sq(z) + 2.0 * c.sigma_star_sq;
    Ok(rhs - lhs)
}

/// Scale against which [`variance_bound_residual`] is judged.
pub fn variance_bound_scale(problem: &FiniteSumProblem, z: &[f64]) -> Result<f64> {
    let c = problem.constants()?;
    let (lhs, _) = component_spread(problem, z);
    Ok(1.0 + lhs + c.a * problem.dist_sq(z) + 2.0 * c.sigma_star_sq)
}

/// `(1/n) sum ||F_i(z) - F(z)||^2` together with the component values.
fn component_spread(problem: &FiniteSumProblem, z: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let dim = problem.dim();
    let mut mean = vec![0.0; dim];
    problem.mean_into(z, &mut mean);
    let values: Vec<Vec<f64>> = problem
        .components()
        .iter()
        .map(|c| {
            let mut v = vec![0.0; dim];
            c.apply_into(z, &mut v);
            v
        })
        .collect();
    let spread = values
        .iter()
        .map(|v| linalg::dist_sq(v, &mean))
        .sum::<f64>()
        / problem.n() as f64;
    (spread, values)
}

/// Both sides of the prefix-mean deviation bound at `z`:
/// `d^2 E||(1/d) sum_{j<d} F_{pi_j}(z) - F(z)||^2` over uniform permutations,
/// and `d (n-d)/(n-1) (A ||z-z*||^2 + 2 sigma*^2)`. Exact by enumeration of
/// all size-`d` subsets, so `n` is limited to 8.
pub fn prefix_deviation_bound(
    problem: &FiniteSumProblem,
    z: &[f64],
    d: usize,
) -> Result<(f64, f64)> {
    let n = problem.n();
    if !(2..=crate::sampling::ENUMERATION_LIMIT).contains(&n) {
        return Err(Error::param(format!(
            "prefix bound needs 2 <= n <= 8, got {n}"
        )));
    }
    if d == 0 || d > n {
        return Err(Error::param(format!("prefix length {d} outside [1, {n}]")));
    }
    let c = problem.constants()?;
    let (_, values) = component_spread(problem, z);
    let lhs = (d * d) as f64 * crate::sampling::wr_sample_variance_enumerated(&values, d)?;
    let rhs =
        (d * (n - d)) as f64 / (n - 1) as f64 * (c.a * problem.dist_sq(z) + 2.0 * c.sigma_star_sq);
    Ok((lhs, rhs))
}

/// Minimum series length accepted by [`plateau_estimate`].
pub const PLATEAU_MIN_LEN: usize = 20;

/// Median of the final 10% of the series.
pub fn plateau_estimate(series: &[f64]) -> Result<f64> {
    if series.len() < PLATEAU_MIN_LEN {
        return Err(Error::param(format!(
            "plateau needs at least {PLATEAU_MIN_LEN} points, got {}",
            series.len()
        )));
    }
    let tail_len = (series.len() / 10).max(1);
    let mut tail = series[series.len() - tail_len..].to_vec();
    tail.sort_by(f64::total_cmp);
    let m = tail.len() / 2;
    Ok(if tail.len() % 2 == 1 {
        tail[m]
    } else {
        0.5 * (tail[m - 1] + tail[m])
    })
}

/// Least-squares slope of `ln y` against `ln x`. All values must be positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("slope needs two or more paired points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::param("log-log slope needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("slope undefined for a single abscissa"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problems::{generate_problem, AffineComponent, ProblemKind, WganParams};

    fn rotation() -> FiniteSumProblem {
        let q = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        FiniteSumProblem::from_components(
            ProblemKind::ExplicitAffine,
            vec![AffineComponent::new(q, vec![0.0; 2]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn relative_error_examples() {
        let p = rotation();
        assert_eq!(relative_error(&p, &[0.5, 0.0], &[1.0, 0.0]).unwrap(), 0.25);
        assert_eq!(relative_error(&p, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(relative_error(&p, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(relative_error(&p, &[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn grad_norm_examples() {
        let p = FiniteSumProblem::from_components(
            ProblemKind::ExplicitAffine,
            vec![AffineComponent::new(Matrix::identity(1), vec![0.0]).unwrap()],
        )
        .unwrap();
        assert_eq!(grad_norm_sq(&p, &[3.0]), 9.0);
        assert_eq!(grad_norm_sq(&p, &[0.0]), 0.0);
    }

    #[test]
    fn wgan_grad_at_shifted_critic() {
        let params = GeneratorParams::WganToy(WganParams {
            d: 2,
            n: 7,
            mean: vec![3.0, 4.0],
            scale: 0.1,
        });
        let p = generate_problem(&params, 2).unwrap();
        let mut z = p.solution_set().point().to_vec();
        z[2] += 1.0;
        assert!((grad_norm_sq(&p, &z) - 1.0).abs() < 1e-12);
        assert!(generator_dist(&p, &z).is_some());
        assert!(generator_dist(&rotation(), &[0.0, 0.0]).is_none());
    }

    #[test]
    fn variance_residual_at_solution_is_sigma() {
        let comps = vec![
            AffineComponent::new(Matrix::identity(1), vec![1.0]).unwrap(),
            AffineComponent::new(Matrix::identity(1), vec![-1.0]).unwrap(),
        ];
        let p = FiniteSumProblem::from_components(ProblemKind::ExplicitAffine, comps).unwrap();
        let r = variance_bound_residual(&p, &[0.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plateau_examples() {
        assert_eq!(plateau_estimate(&[0.3; 40]).unwrap(), 0.3);
        let dec: Vec<f64> = (0..100).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let p = plateau_estimate(&dec).unwrap();
        assert!(p <= dec[89]);
        assert!(plateau_estimate(&[1.0; 19]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..50).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.25)).collect();
        assert!((loglog_slope(&x, &y).unwrap() + 1.25).abs() < 1e-12);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
            assert_eq!(
                serde_json::to_string(&m).unwrap(),
                format!("\"{}\"", m.name())
            );
        }
    }
}
