//! Per-epoch index orders for the four sampling regimes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Random reshuffling: a fresh permutation every epoch.
    #[serde(rename = "RR")]
    RandomReshuffle,
    /// Shuffle once: one permutation reused for every epoch.
    #[serde(rename = "SO")]
    ShuffleOnce,
    /// Incremental: the dataset order `0..n`.
    #[serde(rename = "IEG")]
    Incremental,
    /// `n` independent uniform draws with replacement.
    #[serde(rename = "Uniform")]
    Uniform,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::RandomReshuffle,
        Regime::ShuffleOnce,
        Regime::Incremental,
        Regime::Uniform,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Regime::RandomReshuffle => "RR",
            Regime::ShuffleOnce => "SO",
            Regime::Incremental => "IEG",
            Regime::Uniform => "Uniform",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown sampling regime `{s}`")))
    }
}

/// Stateful order generator. Epochs must be requested as `0, 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct SamplingStrategy {
    regime: Regime,
    n: usize,
    rng: SeededRng,
    frozen: Option<Vec<usize>>,
    next_epoch: u64,
}

impl SamplingStrategy {
    pub fn new(regime: Regime, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("sampling needs n >= 1"));
        }
        let mut rng = SeededRng::new(seed);
        let frozen = (regime == Regime::ShuffleOnce).then(|| shuffled(n, &mut rng));
        Ok(Self {
            regime,
            n,
            rng,
            frozen,
            next_epoch: 0,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index order for epoch `k`, which must be the next epoch in sequence.
    pub fn epoch_order(&mut self, k: u64) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(self.n);
        self.epoch_order_into(k, &mut out)?;
        Ok(out)
    }

    pub fn epoch_order_into(&mut self, k: u64, out: &mut Vec<usize>) -> Result<()> {
        if k != self.next_epoch {
            return Err(Error::contract(format!(
                "epoch {k} requested but the strategy is at epoch {}",
                self.next_epoch
            )));
        }
        self.next_epoch += 1;
        out.clear();
        match self.regime {
            Regime::RandomReshuffle => shuffle_into(self.n, &mut self.rng, out),
            Regime::ShuffleOnce => {
                out.extend_from_slice(self.frozen.as_deref().unwrap_or_default())
            }
            Regime::Incremental => out.extend(0..self.n),
            Regime::Uniform => out.extend((0..self.n).map(|_| self.rng.below(self.n))),
        }
        Ok(())
    }
}

fn shuffled(n: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut v = Vec::with_capacity(n);
    shuffle_into(n, rng, &mut v);
    v
}

/// Inside-out Fisher-Yates.
fn shuffle_into(n: usize, rng: &mut SeededRng, out: &mut Vec<usize>) {
    out.clear();
    for i in 0..n {
        let j = rng.below(i + 1);
        if j == i {
            out.push(i);
        } else {
            out.push(out[j]);
            out[j] = i;
        }
    }
}

fn population_stats(vectors: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let n = vectors.len();
    let dim = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::contract("vectors differ in length"));
    }
    let mut mean = vec![0.0; dim];
    for v in vectors {
        linalg::axpy(1.0, v, &mut mean);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let var = vectors
        .iter()
        .map(|v| linalg::dist_sq(v, &mean))
        .sum::<f64>()
        / n as f64;
    Ok((mean, var))
}

/// Expected squared deviation of a size-`d` without-replacement sample mean
/// from the population mean: `(n - d) / (d (n - 1)) * sigma^2`.
pub fn wr_sample_variance(vectors: &[Vec<f64>], d: usize) -> Result<f64> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::param(format!("population needs n >= 2, got {n}")));
    }
    if d == 0 || d > n {
        return Err(Error::param(format!("sample size {d} outside [1, {n}]")));
    }
    let (_, var) = population_stats(vectors)?;
    Ok((n - d) as f64 / (d as f64 * (n - 1) as f64) * var)
}

/// Largest population accepted by [`wr_sample_variance_enumerated`].
pub const ENUMERATION_LIMIT: usize = 8;

/// Brute-force average of the squared deviation over all size-`d` subsets.
pub fn wr_sample_variance_enumerated(vectors: &[Vec<f64>], d: usize) -> Result<f64> {
    let n = vectors.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::param(format!(
            "enumeration limited to n <= {ENUMERATION_LIMIT}, got {n}"
        )));
    }
    if n == 0 || d == 0 || d > n {
        return Err(Error::param(format!("sample size {d} outside [1, {n}]")));
    }
    let (mean, _) = population_stats(vectors)?;
    let dim = mean.len();
    let mut total = 0.0;
    let mut count = 0u32;
    let mut sample = vec![0.0; dim];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != d {
            continue;
        }
        sample.fill(0.0);
        for (i, v) in vectors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                linalg::axpy(1.0, v, &mut sample);
            }
        }
        sample.iter_mut().for_each(|s| *s /= d as f64);
        total += linalg::dist_sq(&sample, &mean);
        count += 1;
    }
    Ok(total / f64::from(count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_is_identity() {
        let mut s = SamplingStrategy::new(Regime::Incremental, 4, 0).unwrap();
        for k in 0..3 {
            assert_eq!(s.epoch_order(k).unwrap(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn shuffle_once_is_frozen() {
        let mut s = SamplingStrategy::new(Regime::ShuffleOnce, 9, 5).unwrap();
        let first = s.epoch_order(0).unwrap();
        for k in 1..8 {
            assert_eq!(s.epoch_order(k).unwrap(), first);
        }
    }

    #[test]
    fn reshuffle_reproducible_and_varies() {
        let mut a = SamplingStrategy::new(Regime::RandomReshuffle, 10, 77).unwrap();
        let mut b = SamplingStrategy::new(Regime::RandomReshuffle, 10, 77).unwrap();
        let orders: Vec<_> = (0..5).map(|k| a.epoch_order(k).unwrap()).collect();
        for (k, o) in orders.iter().enumerate() {
            assert_eq!(&b.epoch_order(k as u64).unwrap(), o);
        }
        assert!(orders.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn out_of_order_epoch_rejected() {
        let mut s = SamplingStrategy::new(Regime::RandomReshuffle, 3, 1).unwrap();
        assert!(matches!(s.epoch_order(1), Err(Error::Contract(_))));
        s.epoch_order(0).unwrap();
        assert!(matches!(s.epoch_order(0), Err(Error::Contract(_))));
        s.epoch_order(1).unwrap();
    }

    #[test]
    fn regime_parse() {
        assert_eq!("rr".parse::<Regime>().unwrap(), Regime::RandomReshuffle);
        assert_eq!("Uniform".parse::<Regime>().unwrap(), Regime::Uniform);
        assert!("xx".parse::<Regime>().is_err());
    }

    #[test]
    fn variance_examples() {
        let pop: Vec<Vec<f64>> = [1.0, -1.0, 2.0, -2.0].iter().map(|&x| vec![x]).collect();
        let v = wr_sample_variance(&pop, 2).unwrap();
        assert!((v - 2.5 / 3.0).abs() < 1e-15);
        assert!((wr_sample_variance_enumerated(&pop, 2).unwrap() - v).abs() < 1e-15);
        assert_eq!(wr_sample_variance(&pop, 4).unwrap(), 0.0);
        assert!((wr_sample_variance(&pop, 1).unwrap() - 2.5).abs() < 1e-15);
        assert!(wr_sample_variance_enumerated(&pop, 4).unwrap() < 1e-30);
    }

    #[test]
    fn variance_errors() {
        assert!(matches!(
            wr_sample_variance(&[vec![1.0]], 1),
            Err(Error::Parameter(_))
        ));
        let big: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            wr_sample_variance_enumerated(&big, 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            wr_sample_variance(&big, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn identical_population_zero_variance() {
        let pop = vec![vec![3.0, -1.0]; 5];
        for d in 1..=5 {
            assert_eq!(wr_sample_variance_enumerated(&pop, d).unwrap(), 0.0);
        }
    }
}
