//! The extension process, reserve sampling and the cover step.

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use steiner_core::hypercore::{subsets, vset, IntVec, Params, RGraph};
use steiner_core::process::{
    chernoff_harness, freedman_harness, root_trace, run_process, sample_reserve, trace_of, validate_run, ExtensionType,
};
use steiner_core::exec::Exec;

/// Mean extension count over sampled non-R edges must stay within this band
/// of (n^{−ρ})²(n−2), fixed from pilot seeds 0–4.
const RESERVE_BAND: f64 = 0.25;

#[test]
fn reserve_counts_match_typicality() {
    let p = Params::new(3, 2, 200).unwrap().with_rho(num_rational::BigRational::new(1.into(), 36.into()));
    let rate = 200f64.powf(-1.0 / 36.0);
    let predicted = rate * rate * 198.0;
    for seed in 0..5 {
        let (r, cert) = sample_reserve(&p, None, seed);
        assert!((cert.rate - rate).abs() < 1e-12);
        assert!(cert.bounded);
        assert_eq!(cert.sampled, 1000.min(19900 - r.len()));
        let dev = (cert.mean_count - predicted).abs() / predicted;
        assert!(dev < RESERVE_BAND, "seed {seed}: mean {} vs {predicted}", cert.mean_count);
    }
}

#[test]
fn first_extension_is_uniform() {
    // root edge 12 on K²₈: six candidate third vertices
    let t = ExtensionType::clique(3, 2);
    let roots = vec![vec![1, 2]];
    let mut counts: HashMap<u32, u64> = HashMap::new();
    let trials = 10_000u64;
    for seed in 0..trials {
        let run = run_process(&t, &roots, &IntVec::new(), 8, None, 0.0, seed, 8).unwrap();
        *counts.entry(run.outcome[0][2]).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let e = trials as f64 / 6.0;
    let stat: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(5.0).unwrap().cdf(stat);
    assert!(p > 0.01, "chi-square {stat}, p = {p}");
}

#[test]
fn cover_setting_respects_the_filter() {
    let t = ExtensionType::clique(3, 2);
    let r: RGraph = RGraph::from_edges(30, 2, subsets(&(10..=30).collect::<Vec<_>>(), 2)).unwrap();
    let mut r = r;
    for v in 10..=30 {
        for root in [1u32, 2, 3, 4] {
            r.insert(vset(&[root, v])).unwrap();
        }
    }
    let in_r = |e: &[u32]| r.contains(e);
    let roots = vec![vec![1, 2], vec![3, 4]];
    let run = run_process(&t, &roots, &IntVec::new(), 30, Some(&in_r), 0.0, 1, 8).unwrap();
    assert_eq!(run.aborted_at, None);
    for m in &run.outcome {
        for e in [vset(&[m[0], m[2]]), vset(&[m[1], m[2]])] {
            assert!(r.contains(&e));
        }
    }
}

#[test]
fn harnesses_respect_their_bounds() {
    let c = chernoff_harness(100_000, 80, 0.25, 0.3, 3, Exec::Parallel).unwrap();
    assert!(c.pass, "{c:?}");
    let f = freedman_harness(20_000, 64, 1.0, 16.0, 3, Exec::Parallel).unwrap();
    assert!(f.pass, "{f:?}");
    let seq = chernoff_harness(5_000, 80, 0.25, 0.3, 3, Exec::Sequential).unwrap();
    let par = chernoff_harness(5_000, 80, 0.25, 0.3, 3, Exec::Parallel).unwrap();
    assert_eq!(seq.hits, par.hits);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn runs_are_valid_and_reproducible(
        n in 8u32..30,
        roots in prop::collection::vec((1u32..30, 1u32..30), 1..12),
        forbid in prop::collection::vec((1u32..30, 1u32..30), 0..15),
        seed in any::<u64>(),
        q in 3usize..5,
    ) {
        let t = ExtensionType::clique(q, 2);
        let roots: Vec<Vec<u32>> = roots
            .into_iter()
            .map(|(a, b)| (a % n + 1, b % n + 1))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| vec![a.min(b), a.max(b)])
            .collect();
        prop_assume!(!roots.is_empty());
        let mut b = IntVec::new();
        for (x, y) in forbid {
            let (x, y) = (x % n + 1, y % n + 1);
            if x != y {
                b.set(vset(&[x.min(y), x.max(y)]), 1);
            }
        }
        let run = run_process(&t, &roots, &b, n, None, 0.5, seed, 8).unwrap();
        let again = run_process(&t, &roots, &b, n, None, 0.5, seed, 8).unwrap();
        prop_assert_eq!(serde_json::to_string(&run).unwrap(), serde_json::to_string(&again).unwrap());
        prop_assert_eq!(validate_run(&t, &run, &b), None);
        let done = run.outcome.len();
        for e in t.rooted_edges() {
            prop_assert_eq!(trace_of(&run, &e), root_trace(&t, &roots[..done], &e));
        }
        for (i, m) in run.outcome.iter().enumerate() {
            prop_assert_eq!(&m[..2], &roots[i][..]);
        }
    }
}
