use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;

use interval_consensus::bounds::{sample_complexity, BoundInputs};
use interval_consensus::experiment::{self, ExperimentConfig, Sweep};
use interval_consensus::oracle::{decompose, true_objective, true_optimum};
use interval_consensus::queries::{
    label_binary_search, label_fractional, label_full, probe_order, search_voter, SubsetMode,
};
use interval_consensus::rng::{self, Purpose};
use interval_consensus::scoring::sorted_samples;
use interval_consensus::synthesis::{generate_voters, VoterGenSpec};
use interval_consensus::{
    combined_label, erm_bruteforce, erm_interval, individual_label, score_naive, score_sweepline, DistributionSpec,
    VoterInterval,
};

fn voters_strategy(max_n: usize) -> impl Strategy<Value = Vec<VoterInterval>> {
    prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..=max_n)
        .prop_map(|pairs| pairs.into_iter().map(|(a, b)| VoterInterval::new(a.min(b), a.max(b)).unwrap()).collect())
}

/// Voters plus samples where roughly a third of the samples sit exactly on an endpoint.
fn scenario_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = (Vec<VoterInterval>, Vec<f64>)> {
    voters_strategy(max_n).prop_flat_map(move |voters| {
        let endpoints: Vec<f64> = voters.iter().flat_map(|v| [v.lo(), v.hi()]).collect();
        let pick = prop::sample::select(endpoints);
        let sample = prop_oneof![2 => 0.0..=1.0f64, 1 => pick];
        (Just(voters), prop::collection::vec(sample, 1..=max_m))
    })
}

/// Voters and samples on a 1/1024 grid inside [0, 1/2], so shifting by a grid
/// multiple up to 1/2 is exact.
fn grid_scenario() -> impl Strategy<Value = (Vec<(u32, u32)>, Vec<u32>, u32)> {
    (prop::collection::vec((0u32..=512, 0u32..=512), 1..=8), prop::collection::vec(0u32..=512, 1..=60), 0u32..=512)
}

fn grid(k: u32) -> f64 {
    k as f64 / 1024.0
}

fn distributions() -> [DistributionSpec; 3] {
    [DistributionSpec::Uniform, DistributionSpec::truncated_normal(), DistributionSpec::truncated_exponential()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn combined_label_is_sum_of_individual((voters, xs) in scenario_strategy(12, 30)) {
        let n = voters.len() as i64;
        for &x in &xs {
            let l = combined_label(&voters, x);
            prop_assert_eq!(l, voters.iter().map(|v| individual_label(v, x)).sum::<i64>());
            prop_assert!(l.abs() <= n);
            prop_assert_eq!((l - n).rem_euclid(2), 0);
        }
    }

    #[test]
    fn sweepline_matches_naive((voters, xs) in scenario_strategy(10, 200)) {
        prop_assert_eq!(score_sweepline(&voters, &xs).unwrap(), score_naive(&voters, &xs).unwrap());
    }

    #[test]
    fn kadane_matches_bruteforce((voters, xs) in scenario_strategy(10, 200)) {
        let scored = score_sweepline(&voters, &xs).unwrap();
        prop_assert_eq!(erm_interval(&scored).unwrap(), erm_bruteforce(&scored).unwrap());
    }

    #[test]
    fn binary_search_labels_match_full((voters, xs) in scenario_strategy(10, 300)) {
        let (full, _) = label_full(&voters, &xs).unwrap();
        let (binary, ledger) = label_binary_search(&voters, &xs).unwrap();
        prop_assert_eq!(&full, &binary);
        prop_assert_eq!(ledger.total_queries(), ledger.per_voter_queries().iter().sum::<u64>());
    }
}

proptest! {
    #[test]
    fn label_is_constant_on_segments(voters in voters_strategy(10), t in 0.0..1.0f64) {
        let d = decompose(&voters).unwrap();
        for i in 0..d.num_segments() {
            let (a, b) = d.segment(i);
            let x = a + t * (b - a);
            if x > a && x < b {
                prop_assert_eq!(combined_label(&voters, x), d.segment_labels()[i]);
            }
        }
    }

    #[test]
    fn erm_endpoints_are_samples((voters, xs) in scenario_strategy(10, 100)) {
        let scored = score_sweepline(&voters, &xs).unwrap();
        let erm = erm_interval(&scored).unwrap();
        let (j, k) = (erm.sample_index_lo, erm.sample_index_hi);
        prop_assert!(j <= k);
        prop_assert_eq!(scored.xs()[j], erm.lo);
        prop_assert_eq!(scored.xs()[k], erm.hi);
        let sum: i64 = scored.labels()[j..=k].iter().sum();
        prop_assert_eq!(sum as f64, erm.empirical_score);
        let bound = (voters.len() * xs.len()) as f64;
        prop_assert!(erm.empirical_score.abs() <= bound);
        prop_assert!(erm.empirical_score >= *scored.labels().iter().max().unwrap() as f64);
    }

    #[test]
    fn shifting_everything_preserves_labels_and_score((pairs, ks, shift) in grid_scenario()) {
        let build = |c: u32| {
            let voters: Vec<VoterInterval> = pairs
                .iter()
                .map(|&(a, b)| VoterInterval::new(grid(a.min(b) + c), grid(a.max(b) + c)).unwrap())
                .collect();
            let xs: Vec<f64> = ks.iter().map(|&k| grid(k + c)).collect();
            score_sweepline(&voters, &xs).unwrap()
        };
        let base = build(0);
        let moved = build(shift);
        prop_assert_eq!(base.labels(), moved.labels());
        let a = erm_interval(&base).unwrap();
        let b = erm_interval(&moved).unwrap();
        prop_assert_eq!(a.empirical_score, b.empirical_score);
        prop_assert_eq!((a.sample_index_lo, a.sample_index_hi), (b.sample_index_lo, b.sample_index_hi));
        prop_assert_eq!(b.lo, a.lo + grid(shift));
    }

    #[test]
    fn cdf_is_monotone_and_inverts(x1 in 0.0..=1.0f64, x2 in 0.0..=1.0f64, u in 1e-9..(1.0 - 1e-9)) {
        for spec in distributions() {
            let (a, b) = (x1.min(x2), x1.max(x2));
            let (ca, cb) = (spec.cdf(a).unwrap(), spec.cdf(b).unwrap());
            prop_assert!((0.0..=1.0).contains(&ca));
            prop_assert!(ca <= cb, "{} cdf({a}) = {ca} > cdf({b}) = {cb}", spec.kind_name());
            let x = spec.inverse_cdf(u).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((spec.cdf(x).unwrap() - u).abs() <= 1e-9);
        }
    }

    #[test]
    fn sample_complexity_is_strictly_monotone(
        n in 1u64..10_000,
        eps in 0.001..0.5f64,
        delta in 0.001..0.5f64,
    ) {
        let at = |n, e, d| sample_complexity(&BoundInputs::new(n, e, d).unwrap()).unwrap();
        let base = at(n, eps, delta);
        prop_assert!(at(n + 1, eps, delta) > base);
        prop_assert!(at(n, eps * 0.9, delta) > base);
        prop_assert!(at(n, eps, delta * 0.5) > base);
    }

    #[test]
    fn generated_voters_fit_and_keep_width(
        n in 1usize..50,
        w1 in 0.0..=1.0f64,
        w2 in 0.0..=1.0f64,
        seed in any::<u64>(),
    ) {
        let spec = VoterGenSpec { n, w_min: w1.min(w2), w_max: w1.max(w2) };
        let voters = generate_voters(&spec, &mut rng::root(seed)).unwrap();
        prop_assert_eq!(voters.len(), n);
        for v in &voters {
            prop_assert!(0.0 <= v.lo() && v.hi() <= 1.0);
            prop_assert!(v.width() >= spec.w_min - 1e-15 && v.width() <= spec.w_max + 1e-15);
        }
    }
}

#[test]
fn query_counts_respect_search_bound() {
    let mut rng = rng::root(11);
    let dist = DistributionSpec::Uniform;
    for trial in 0..300 {
        let n = rng.random_range(1..=20);
        let w = rng.random_range(0.0..0.5);
        let spec = VoterGenSpec { n, w_min: w, w_max: w + 0.1 };
        let voters = generate_voters(&spec, &mut rng).unwrap();
        let m = rng.random_range(1..=2000);
        let xs = sorted_samples(&dist.sample(&mut rng, m).unwrap()).unwrap();
        let (_, ledger) = label_binary_search(&voters, &xs).unwrap();
        let log2m = (m as f64).log2().ceil() as u64;
        for (c, v) in voters.iter().enumerate() {
            let spent = ledger.per_voter_queries()[c];
            match probe_order(m).position(|i| v.contains(xs[i])) {
                Some(p) => {
                    let probes = p as u64 + 1;
                    assert!(spent <= probes + 2 * log2m + 2, "trial {trial} voter {c}: {spent} queries");
                }
                None => assert_eq!(spent, m as u64, "a voter approving nothing scans every sample"),
            }
        }
    }
}

#[test]
fn search_never_repeats_a_question() {
    for m in 1..=200usize {
        for lo in (0..m).step_by(7) {
            for hi in (lo..m).step_by(5) {
                let mut seen = HashSet::new();
                let r = search_voter(m, |i| {
                    assert!(seen.insert(i), "index {i} asked twice (m={m})");
                    (lo..=hi).contains(&i)
                });
                assert_eq!(r.approved, Some((lo, hi)));
                assert_eq!(r.queries as usize, seen.len());
            }
        }
    }
}

#[test]
fn fractional_labels_are_unbiased_after_rescaling() {
    let spec = VoterGenSpec::preset(100);
    let voters = generate_voters(&spec, &mut rng::root(5)).unwrap();
    let n = voters.len() as f64;
    let redraws = 10_000;
    for (idx, &x) in [0.1, 0.35, 0.5, 0.8].iter().enumerate() {
        let truth = combined_label(&voters, x) as f64;
        for fraction in [0.75, 0.5, 0.25, 0.1] {
            let mut rng = rng::substream(17, Purpose::Subsets, idx as u64, (fraction * 100.0) as u64);
            let mut values = Vec::with_capacity(redraws);
            let mut k = 0;
            for _ in 0..redraws {
                let (scored, ledger) =
                    label_fractional(&voters, &[x], fraction, SubsetMode::PerPoint, &mut rng).unwrap();
                k = ledger.total_queries() as usize;
                values.push(scored.labels()[0] as f64 * n / k as f64);
            }
            let mean = values.iter().sum::<f64>() / redraws as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (redraws - 1) as f64;
            let se = (var / redraws as f64).sqrt();
            assert!(
                (mean - truth).abs() <= 3.0 * se + 1e-12,
                "x={x} fraction={fraction} k={k}: mean {mean} vs {truth} (se {se})"
            );
        }
    }
}

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    let draws = 100_000;
    let critical = 1.9495 / (draws as f64).sqrt();
    let runs = 100;
    for spec in distributions() {
        let mut passed = 0;
        for run in 0..runs {
            let mut xs = spec.sample(&mut rng::substream(run, Purpose::Samples, 99, 0), draws).unwrap();
            xs.sort_by(f64::total_cmp);
            let m = xs.len() as f64;
            let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
                let f = spec.cdf(x).unwrap();
                d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
            });
            if d < critical {
                passed += 1;
            }
        }
        assert!(passed * 100 >= 99 * runs, "{}: {passed}/{runs} KS runs below critical value", spec.kind_name());
    }
}

#[test]
fn sample_means_match_closed_forms() {
    for (spec, want) in [
        (DistributionSpec::Uniform, 0.5),
        (DistributionSpec::truncated_normal(), 0.5),
        (DistributionSpec::truncated_exponential(), 0.23134263963622595),
    ] {
        assert!((spec.mean() - want).abs() < 1e-12);
        let xs = spec.sample(&mut rng::root(3), 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - want).abs() < 1e-3, "{}: {mean}", spec.kind_name());
    }
}

#[test]
fn optimum_beats_random_intervals() {
    let mut rng = rng::root(23);
    for trial in 0..30 {
        let n = rng.random_range(1..=30);
        let voters = generate_voters(&VoterGenSpec { n, w_min: 0.05, w_max: 0.7 }, &mut rng).unwrap();
        let d = decompose(&voters).unwrap();
        for spec in distributions() {
            let opt = true_optimum(&d, &spec).unwrap();
            for _ in 0..10_000 {
                let (a, b): (f64, f64) = (rng.random(), rng.random());
                let phi = true_objective(&d, &spec, a.min(b), a.max(b)).unwrap();
                assert!(phi <= opt.empirical_score + 1e-12, "trial {trial} {}: {phi} beats optimum", spec.kind_name());
            }
        }
    }
}

#[test]
fn optimum_is_locally_optimal_and_total_sums() {
    let mut rng = rng::root(29);
    for _ in 0..200 {
        let n = rng.random_range(1..=25);
        let voters = generate_voters(&VoterGenSpec { n, w_min: 0.0, w_max: 1.0 }, &mut rng).unwrap();
        let d = decompose(&voters).unwrap();
        let bp = d.breakpoints();
        let last = d.num_segments() - 1;
        for spec in distributions() {
            let weights = d.weights(&spec).unwrap();
            let whole = true_objective(&d, &spec, 0.0, 1.0).unwrap();
            assert!((whole - weights.iter().sum::<f64>()).abs() < 1e-12);

            let opt = true_optimum(&d, &spec).unwrap();
            if opt.lo == opt.hi {
                continue;
            }
            let (j, k) = (opt.sample_index_lo, opt.sample_index_hi);
            let mut neighbours = Vec::new();
            if j > 0 {
                neighbours.push((j - 1, k));
            }
            if k < last {
                neighbours.push((j, k + 1));
            }
            if j < k {
                neighbours.push((j + 1, k));
                neighbours.push((j, k - 1));
            }
            for (a, b) in neighbours {
                let phi = true_objective(&d, &spec, bp[a], bp[b + 1]).unwrap();
                assert!(phi <= opt.empirical_score + 1e-12);
            }
        }
    }
}

#[test]
fn full_fraction_reproduces_full_information_interval() {
    let m = 2_000;
    let mut full = ExperimentConfig::figure2();
    full.trials = 20;
    full.sweep = Sweep::SampleCounts(vec![m]);
    let mut frac = ExperimentConfig::figure3();
    frac.trials = 20;
    frac.fraction_samples = m;
    frac.sweep = Sweep::VoterFractions(vec![1.0]);
    let a = experiment::run(&full).unwrap();
    let b = experiment::run(&frac).unwrap();
    for (x, y) in a.trials.iter().zip(&b.trials) {
        assert_eq!(x.trial_id, y.trial_id);
        assert_eq!((x.interval.lo, x.interval.hi), (y.interval.lo, y.interval.hi));
    }
}
