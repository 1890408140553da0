use proptest::prelude::*;

use rkr_core::oracle::{self, EnumBudget};
use rkr_core::poisson::{self, CountDistribution, CountSource};
use rkr_core::records::{self, detect_events, rkr_level};
use rkr_core::scan::{self, ScanTarget};
use rkr_core::Pmf;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..8)
        .prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-6)
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pmf_accessor_identities(w in weights()) {
        let pmf = Pmf::from_probs(&normalized(&w)).unwrap();
        let m = pmf.support_size();
        prop_assert_eq!(pmf.tail(1).unwrap(), 1.0);
        for i in 1..=m {
            let s = pmf.tail(i).unwrap();
            prop_assert!((s + pmf.cdf(i - 1) - 1.0).abs() <= 1e-15);
            prop_assert!((s - pmf.tail(i + 1).unwrap() - pmf.prob(i)).abs() <= 1e-15);
            prop_assert!(pmf.tail(i + 1).unwrap() <= s);
            prop_assert!(pmf.cdf(i) >= pmf.cdf(i - 1));
        }
    }

    #[test]
    fn levels_sum_and_posterior_normalize(w in weights(), k in 1usize..5) {
        let pmf = Pmf::from_probs(&normalized(&w)).unwrap();
        let mut total = 0.0;
        for j in 0..=k {
            total += records::marginal_prob(&pmf, k, j).unwrap();
            if let Ok(q) = records::posterior(&pmf, k, j) {
                let s: f64 = q.iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
                prop_assert!(q.iter().all(|&x| x >= 0.0));
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detect_events_agrees_with_rkr_level(
        seq in prop::collection::vec(1usize..6, 2..60),
        k in 1usize..6,
    ) {
        prop_assume!(seq.len() > k);
        let ev = detect_events(&seq, k).unwrap();
        prop_assert_eq!(ev.levels.len(), seq.len() - k);
        for &(n, j) in &ev.levels {
            prop_assert_eq!(rkr_level(&seq, n, k).unwrap(), j);
            prop_assert!(j <= k);
        }
    }

    #[test]
    fn fixed_scan_matches_naive(
        seq in prop::collection::vec(1usize..5, 1..200),
        k in 1usize..10,
        m in 1usize..5,
    ) {
        prop_assume!(seq.len() >= k);
        let r = scan::fixed_target_scan(&seq, m, k).unwrap();
        let counts: Vec<usize> = seq
            .windows(k)
            .map(|w| w.iter().filter(|&&x| x >= m).count())
            .collect();
        let best = *counts.iter().max().unwrap();
        prop_assert_eq!(r.statistic, best);
        prop_assert_eq!(r.argmax_index, counts.iter().position(|&c| c == best).unwrap() + 1);
    }

    #[test]
    fn random_scan_is_max_level(
        seq in prop::collection::vec(1usize..5, 2..200),
        k in 1usize..8,
    ) {
        prop_assume!(seq.len() > k);
        let r = scan::random_target_scan(&seq, k).unwrap();
        let ev = detect_events(&seq, k).unwrap();
        let best = ev.levels.iter().map(|&(_, j)| j).max().unwrap();
        prop_assert_eq!(r.statistic, best);
        prop_assert_eq!(rkr_level(&seq, r.argmax_index, k).unwrap(), best);
    }

    #[test]
    fn tv_is_a_metric(
        a in prop::collection::vec(0.0f64..1.0, 4),
        b in prop::collection::vec(0.0f64..1.0, 4),
        c in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let dist = |w: &[f64]| {
            let total: f64 = w.iter().sum::<f64>() + 1e-9;
            CountDistribution::from_masses(
                w.iter().map(|x| (x + 1e-9 / 4.0) / total).collect(),
                0.0,
                3,
                CountSource::Empirical,
            )
        };
        let (a, b, c) = (dist(&a), dist(&b), dist(&c));
        let ab = poisson::tv_distance(&a, &b);
        prop_assert_eq!(ab, poisson::tv_distance(&b, &a));
        prop_assert_eq!(poisson::tv_distance(&a, &a), 0.0);
        prop_assert!(ab <= poisson::tv_distance(&a, &c) + poisson::tv_distance(&c, &b) + 1e-15);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&ab));
    }
}

#[test]
fn scan_tail_monotone_in_s_and_n() {
    let pmf = Pmf::from_probs(&[0.5, 0.3, 0.2]).unwrap();
    let b = EnumBudget::default();
    for target in [ScanTarget::Fixed(2), ScanTarget::Random] {
        for k in 1..=3 {
            let start = if target == ScanTarget::Random {
                k + 1
            } else {
                k
            };
            for n in start..=7 {
                let mut prev = f64::INFINITY;
                for s in 0..=k + 1 {
                    let v = oracle::exact_scan_tail(&pmf, target, k, n, s, &b).unwrap();
                    assert!(v <= prev + 1e-12);
                    prev = v;
                    if n > start {
                        let shorter =
                            oracle::exact_scan_tail(&pmf, target, k, n - 1, s, &b).unwrap();
                        assert!(shorter <= v + 1e-12);
                    }
                }
            }
        }
    }
}
