use std::collections::HashMap;

use segrr::sampling::{self, Regime, SamplingStrategy};

#[test]
fn reshuffling_is_uniform_over_permutations() {
    // chi-square with 23 dof; 0.1% critical value is 49.73
    let mut s = SamplingStrategy::new(Regime::RandomReshuffle, 4, 123).unwrap();
    let draws = 48_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for k in 0..draws {
        *counts.entry(s.epoch_order(k).unwrap()).or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    let expected = draws as f64 / 24.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 49.73, "chi2 {chi2}");
}

#[test]
fn uniform_draws_are_balanced() {
    // chi-square with 9 dof; 0.1% critical value is 27.88
    let n = 10;
    let mut s = SamplingStrategy::new(Regime::Uniform, n, 5).unwrap();
    let mut counts = vec![0u64; n];
    let epochs = 10_000;
    let mut repeats = 0;
    for k in 0..epochs {
        let o = s.epoch_order(k).unwrap();
        let mut seen = o.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() < n {
            repeats += 1;
        }
        for i in o {
            counts[i] += 1;
        }
    }
    let expected = (epochs as usize * n) as f64 / n as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 27.88, "chi2 {chi2}");
    // P(all distinct) = 10!/10^10
    assert!(repeats > epochs * 99 / 100);
}

#[test]
fn shuffle_once_reuses_first_permutation() {
    let mut s = SamplingStrategy::new(Regime::ShuffleOnce, 12, 9).unwrap();
    let first = s.epoch_order(0).unwrap();
    for k in 1..20 {
        assert_eq!(s.epoch_order(k).unwrap(), first);
    }
    let mut rr = SamplingStrategy::new(Regime::RandomReshuffle, 12, 9).unwrap();
    let a = rr.epoch_order(0).unwrap();
    let b = rr.epoch_order(1).unwrap();
    assert_ne!(a, b);
}

#[test]
fn incremental_is_identity() {
    let mut s = SamplingStrategy::new(Regime::Incremental, 6, 0).unwrap();
    assert_eq!(s.epoch_order(0).unwrap(), vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(s.epoch_order(1).unwrap(), vec![0, 1, 2, 3, 4, 5]);
}

#[test]
fn epochs_must_be_sequential() {
    let mut s = SamplingStrategy::new(Regime::RandomReshuffle, 5, 1).unwrap();
    s.epoch_order(0).unwrap();
    assert!(s.epoch_order(2).is_err());
    assert!(SamplingStrategy::new(Regime::Uniform, 0, 1).is_err());
}

#[test]
fn regime_labels_parse() {
    for r in Regime::ALL {
        assert_eq!(r.label().parse::<Regime>().unwrap(), r);
        assert_eq!(r.label().to_lowercase().parse::<Regime>().unwrap(), r);
    }
    assert!("XX".parse::<Regime>().is_err());
}

#[test]
fn without_replacement_variance_closed_form() {
    let pop = vec![
        vec![1.0, 0.0],
        vec![-1.0, 2.0],
        vec![3.0, 1.0],
        vec![0.0, -3.0],
        vec![2.0, 2.0],
    ];
    for d in 1..=5 {
        let a = sampling::wr_sample_variance(&pop, d).unwrap();
        let b = sampling::wr_sample_variance_enumerated(&pop, d).unwrap();
        assert!((a - b).abs() <= 1e-12, "d {d}: {a} vs {b}");
    }
    assert!(sampling::wr_sample_variance(&pop, 5).unwrap().abs() < 1e-15);
}
