use fairaudit_core::oracle::brute_force_search;
use fairaudit_core::synth::random_fixture;
use fairaudit_core::{
    enumerate_with_findings, AuditConfig, AuditMode, Comparison, CountConfig, CountThresholds,
    Dataset, Direction, ExclusionMode, Exclusions, Finding, PairObjective, PairwiseConfig, Ratio,
    Selector, StopReason, UtilityBounds, UtilityConfig, Verdict,
};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn assert_same(search: &Option<Finding>, brute: &Option<Finding>) {
    match (search, brute) {
        (None, None) => {}
        (Some(Finding::Count(a)), Some(Finding::Count(b))) => assert_eq!(a, b),
        (Some(Finding::Utility(a)), Some(Finding::Utility(b))) => {
            assert_eq!((&a.selector, a.target), (&b.selector, b.target));
            assert!(close(a.margin, b.margin), "{a:?} vs {b:?}");
        }
        (Some(Finding::Pairwise(a)), Some(Finding::Pairwise(b))) => {
            assert_eq!((&a.under, &a.over), (&b.under, &b.over));
            assert!(close(a.gap, b.gap), "{a:?} vs {b:?}");
        }
        (a, b) => panic!("search {a:?} but brute force {b:?}"),
    }
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (2usize..=7, 2usize..=3, 0u64..10_000)
        .prop_flat_map(|(m, k, seed)| ((2 * k)..=40usize).prop_map(move |n| (m, k, n, seed)))
        .prop_map(|(m, k, n, seed)| random_fixture(m, n, k, seed).unwrap())
}

fn bounds(k: usize) -> impl Strategy<Value = UtilityBounds> {
    prop::collection::vec((0u8..=6, 0u8..=4), k).prop_map(|v| {
        let lower = v.iter().map(|&(a, _)| a as f64).collect();
        let upper = v.iter().map(|&(a, w)| (a + w) as f64).collect();
        UtilityBounds::new(lower, upper).unwrap()
    })
}

fn count_mode() -> impl Strategy<Value = AuditMode> {
    (
        0i64..=6,
        1i64..=4,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(a, w, over, pooled, same_attr)| {
            let th = CountThresholds::fractional(Ratio::new(a, 10), Ratio::new(a + w, 10)).unwrap();
            let mut cfg = CountConfig::new(th).forbid_same_attribute(same_attr);
            if over {
                cfg = cfg.direction(Direction::Over);
            }
            if pooled {
                cfg = cfg.comparison(Comparison::PooledComplement);
            }
            AuditMode::Count(cfg)
        })
}

fn mode_for(d: &Dataset) -> BoxedStrategy<AuditMode> {
    let k = d.k();
    let n = d.n() as f64;
    prop_oneof![
        count_mode(),
        (bounds(k), 1u32..=20).prop_map(move |(b, g)| {
            AuditMode::Utility(UtilityConfig::new(b, n * g as f64 / 40.0).unwrap())
        }),
        (bounds(k), 1u32..=20, 2usize..=3, any::<bool>()).prop_map(move |(b, g, s, longest)| {
            let mut cfg = PairwiseConfig::new(b, n * g as f64 / 20.0, s).unwrap();
            if longest {
                cfg = cfg.objective(PairObjective::Longest);
            }
            AuditMode::Pairwise(cfg)
        }),
    ]
    .boxed()
}

fn case() -> impl Strategy<Value = (Dataset, AuditMode)> {
    dataset().prop_flat_map(|d| {
        let mode = mode_for(&d);
        (Just(d), mode)
    })
}

fn excluded(m: usize) -> impl Strategy<Value = (ExclusionMode, Vec<Selector>)> {
    (
        prop_oneof![Just(ExclusionMode::Disjoint), Just(ExclusionMode::NotEqual)],
        prop::collection::vec(prop::collection::vec(0..m, 1..=2), 0..=2),
    )
        .prop_map(move |(mode, sels)| {
            let sels = sels
                .into_iter()
                .map(|mut idx| {
                    idx.sort_unstable();
                    idx.dedup();
                    Selector::from_indices(m, &idx).unwrap()
                })
                .collect();
            (mode, sels)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_matches_brute_force((d, mode) in case()) {
        let searched = mode.search(&d, &Exclusions::none()).unwrap();
        let brute = brute_force_search(&d, &mode, &Exclusions::none()).unwrap();
        assert_same(&searched, &brute);
    }

    #[test]
    fn search_matches_brute_force_under_exclusions(
        ((d, mode), (excl_mode, sels)) in case().prop_flat_map(|(d, mode)| {
            let m = d.m();
            (Just((d, mode)), excluded(m))
        })
    ) {
        let excl = Exclusions::new(excl_mode, sels);
        let searched = mode.search(&d, &excl).unwrap();
        let brute = brute_force_search(&d, &mode, &excl).unwrap();
        assert_same(&searched, &brute);
    }

    #[test]
    fn enumeration_replays_under_brute_force(
        (d, mode) in case(),
        not_equal in any::<bool>(),
        limit in 1usize..=6,
    ) {
        let excl_mode = if not_equal { ExclusionMode::NotEqual } else { ExclusionMode::Disjoint };
        let cfg = AuditConfig::new(mode.clone(), limit).exclusion(excl_mode);
        let (report, findings) = enumerate_with_findings(&d, &cfg).unwrap();
        prop_assert_eq!(report.findings.len(), findings.len());
        prop_assert_eq!(report.verdict == Verdict::Unfair, !findings.is_empty());
        let mut excl = Exclusions::new(excl_mode, Vec::new());
        for f in &findings {
            let brute = brute_force_search(&d, &mode, &excl).unwrap();
            assert_same(&Some(f.clone()), &brute);
            for s in f.selectors() {
                excl.push(s.clone());
            }
        }
        match report.stop_reason {
            StopReason::LimitReached => prop_assert_eq!(findings.len(), limit),
            StopReason::Exhausted => {
                prop_assert!(brute_force_search(&d, &mode, &excl).unwrap().is_none());
            }
        }
    }
}
