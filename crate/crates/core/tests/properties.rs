use proptest::prelude::*;

use segrr::linalg::{self, Matrix};
use segrr::problems::{
    generate_problem, AffineComponent, BilinearParams, FiniteSumProblem, GeneratorParams,
    ProblemKind, QuadraticParams, WganParams,
};
use segrr::rng::SeededRng;
use segrr::sampling::{Regime, SamplingStrategy};
use segrr::schedules::{horizon_stepsize, max_stepsize, Schedule, TheoremRegime};
use segrr::{harness, metrics};

fn generator() -> impl Strategy<Value = GeneratorParams> {
    prop_oneof![
        (1usize..6, 1usize..4, 0.5f64..2.0, 1.0f64..5.0).prop_map(|(n, d, mu, extra)| {
            GeneratorParams::QuadraticScsc(QuadraticParams {
                n,
                d,
                mu,
                l: mu + extra,
                zero_offsets: false,
            })
        }),
        (1usize..6, 1usize..4, 0.5f64..2.0, 0.0f64..5.0).prop_map(|(n, d, lambda, extra)| {
            GeneratorParams::Bilinear(BilinearParams {
                n,
                d,
                lambda_min_plus: lambda,
                l_max: lambda + extra,
                zero_offsets: false,
            })
        }),
        (1usize..6, 1usize..4, 0.0f64..1.0).prop_map(|(n, d, scale)| {
            GeneratorParams::WganToy(WganParams {
                d,
                n,
                mean: (0..d).map(|i| i as f64).collect(),
                scale,
            })
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reshuffled_orders_are_permutations(n in 1usize..40, seed: u64) {
        let mut s = SamplingStrategy::new(Regime::RandomReshuffle, n, seed).unwrap();
        for k in 0..5 {
            let mut o = s.epoch_order(k).unwrap();
            o.sort_unstable();
            prop_assert_eq!(o, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn uniform_orders_in_range(n in 1usize..40, seed: u64) {
        let mut s = SamplingStrategy::new(Regime::Uniform, n, seed).unwrap();
        let o = s.epoch_order(0).unwrap();
        prop_assert_eq!(o.len(), n);
        prop_assert!(o.iter().all(|&i| i < n));
    }

    #[test]
    fn eigen_reconstructs(n in 1usize..8, seed: u64) {
        let mut rng = SeededRng::new(seed);
        let mut m = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..=r {
                let v = rng.normal();
                m[(r, c)] = v;
                m[(c, r)] = v;
            }
        }
        let e = linalg::sym_eigen(&m).unwrap();
        let rebuilt = e.vectors.matmul(&Matrix::from_diag(&e.values)).matmul(&e.vectors.transpose());
        prop_assert!(rebuilt.sub(&m).frobenius_norm() <= 1e-10 * (1.0 + m.frobenius_norm()));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn generated_problems_round_trip_json(params in generator(), seed: u64) {
        let p = generate_problem(&params, seed).unwrap();
        let back = FiniteSumProblem::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.components(), p.components());
        prop_assert_eq!(back.seed(), Some(seed));
        prop_assert_eq!(back.params(), Some(&params));
        prop_assert_eq!(back.solution_set(), p.solution_set());
    }

    #[test]
    fn solution_zeroes_mean_operator(params in generator(), seed: u64) {
        let p = generate_problem(&params, seed).unwrap();
        let f = p.evaluate(None, p.solution_set().point()).unwrap();
        let scale = 1.0 + linalg::norm(p.mean_offset());
        prop_assert!(linalg::norm(&f) <= 1e-9 * scale);
    }

    #[test]
    fn variance_bound_holds(params in generator(), seed: u64, radius in 0.0f64..100.0) {
        let p = generate_problem(&params, seed).unwrap();
        let mut rng = SeededRng::derived(seed, 1);
        let mut z = p.solution_set().point().to_vec();
        linalg::axpy(radius, &rng.normal_vec(p.dim()), &mut z);
        let r = metrics::variance_bound_residual(&p, &z).unwrap();
        let scale = metrics::variance_bound_scale(&p, &z).unwrap();
        prop_assert!(r >= -1e-9 * scale, "residual {r} scale {scale}");
    }

    #[test]
    fn prefix_bound_holds(n in 2usize..7, seed: u64) {
        let params = GeneratorParams::QuadraticScsc(QuadraticParams { n, d: 2, mu: 1.0, l: 3.0, zero_offsets: false });
        let p = generate_problem(&params, seed).unwrap();
        let z = SeededRng::derived(seed, 2).normal_vec(p.dim());
        for d in 1..=n {
            let (lhs, rhs) = metrics::prefix_deviation_bound(&p, &z, d).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "d {d}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn relative_error_translation_invariant(seed: u64, shift in prop::collection::vec(-5.0f64..5.0, 4)) {
        let params = GeneratorParams::Bilinear(BilinearParams { n: 3, d: 2, lambda_min_plus: 1.0, l_max: 2.0, zero_offsets: false });
        let p = generate_problem(&params, seed).unwrap();
        // F'(z) = F(z - t): offsets b_i - Q_i t, solution shifted by t
        let moved: Vec<AffineComponent> = p
            .components()
            .iter()
            .map(|c| {
                let qt = c.q.mul_vec(&shift);
                AffineComponent::new(c.q.clone(), linalg::sub(&c.b, &qt)).unwrap()
            })
            .collect();
        let q = FiniteSumProblem::from_components(ProblemKind::ExplicitAffine, moved).unwrap();
        let mut rng = SeededRng::derived(seed, 3);
        let z0 = rng.normal_vec(4);
        let z = rng.normal_vec(4);
        let plus = |v: &[f64]| v.iter().zip(&shift).map(|(a, b)| a + b).collect::<Vec<_>>();
        let a = metrics::relative_error(&p, &z, &z0).unwrap();
        let b = metrics::relative_error(&q, &plus(&z), &plus(&z0)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn theorem_pairs_keep_multiplier(mu in 0.01f64..5.0, extra in 0.0f64..10.0, n in 1usize..200, k in 2u64..100_000) {
        let l_max = mu + extra;
        let c = segrr::ProblemConstants {
            l_i: vec![l_max],
            l_max,
            l: l_max,
            mu,
            lambda_min_plus: Some(mu),
            a: 2.0 * l_max * l_max,
            sigma_star_sq: 0.0,
            kappa: Some(l_max / mu),
        };
        for regime in [TheoremRegime::StronglyMonotone, TheoremRegime::Affine, TheoremRegime::Monotone] {
            let m = max_stepsize(regime, &c, n).unwrap();
            let h = horizon_stepsize(regime, &c, n, k).unwrap();
            prop_assert_eq!(m.gamma2, regime.multiplier() * m.gamma1);
            prop_assert_eq!(h.gamma2, regime.multiplier() * h.gamma1);
            prop_assert!(h.gamma1 <= m.gamma1 && h.gamma1 > 0.0);
        }
        let s = match Schedule::switching(TheoremRegime::StronglyMonotone, &c, n, None, false) {
            Ok(s) => s,
            Err(segrr::Error::Parameter(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let ks = s.k_star().unwrap();
        let mut prev = f64::INFINITY;
        for j in [ks, ks.saturating_add(1), ks.saturating_add(7), ks.saturating_mul(2), ks.saturating_mul(10)] {
            let p = s.at(j);
            prop_assert!(p.gamma1 <= prev && p.gamma1 > 0.0);
            prop_assert_eq!(p.gamma2, 2.0 * p.gamma1);
            prev = p.gamma1;
        }
    }

    #[test]
    fn csv_round_trips(values in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), 0.0f64..1e300), 0..30)) {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &(mean, std))| harness::AggregateRow {
                epoch: i as u64,
                metric: metrics::Metric::DistSq,
                mean,
                std,
                nruns: 3,
            })
            .collect::<Vec<_>>();
        let metrics = if rows.is_empty() { vec![] } else { vec![metrics::Metric::DistSq] };
        let rec = harness::AggregateRecord { metrics, rows, failures: vec![] };
        prop_assert_eq!(harness::parse_csv(&harness::to_csv_string(&rec)).unwrap(), rec);
    }
}
