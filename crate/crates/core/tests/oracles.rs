mod common;

use common::*;
use morphsynth::choice::{solve, ChoiceInstance};
use morphsynth::estimates::{
    dominates, enumerate_scale, generalized_median, multiset_coefficient, proximity, scale_size, set_median, Dominance,
    Scale,
};
use morphsynth::model::builtin_dataset;
use morphsynth::synthesis::synthesize_component;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn scale_matches_brute_force() {
    for l in 1..=6 {
        for eta in 1..=6u32 {
            let scale = Scale::new(l, eta as usize).unwrap();
            let mut got: Vec<Counts> = enumerate_scale(scale).iter().map(counts).collect();
            let mut want = interval_scale(l, eta);
            assert_eq!(scale_size(scale), want.len() as u128, "size l={l} eta={eta}");
            got.sort();
            want.sort();
            assert_eq!(got, want, "l={l} eta={eta}");
            assert_eq!(
                multiset_coefficient(l, eta as usize).unwrap(),
                all_multisets(l, eta).len() as u64
            );
        }
    }
}

#[test]
fn proximity_matches_bfs_on_p53() {
    let scale = interval_scale(5, 3);
    for a in &scale {
        for b in &scale {
            let d = proximity(&est(a), &est(b)).unwrap();
            assert_eq!(d.magnitude(), bfs_distance(a, b), "{a:?} {b:?}");
            assert_eq!(d.plus == 0, reachable_by_improvements(a, b), "{a:?} {b:?}");
        }
    }
}

#[test]
fn dominance_matches_reachability() {
    let scale = interval_scale(4, 3);
    for a in &scale {
        for b in &scale {
            let want = match (weakly_better(a, b), weakly_better(b, a)) {
                (true, true) => Dominance::Equal,
                (true, false) => Dominance::Better,
                (false, true) => Dominance::Worse,
                (false, false) => Dominance::Incomparable,
            };
            assert_eq!(dominates(&est(a), &est(b)).unwrap(), want, "{a:?} {b:?}");
        }
    }
}

#[test]
fn medians_match_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (l, eta) in [(3, 2), (4, 3), (5, 4)] {
        let scale = interval_scale(l, eta);
        let s = Scale::new(l, eta as usize).unwrap();
        for _ in 0..150 {
            let n = rng.random_range(1..=7);
            let inputs: Vec<Counts> = (0..n).map(|_| random_interval(&mut rng, &scale)).collect();
            let estimates: Vec<_> = inputs.iter().map(|c| est(c)).collect();

            let want = median_over(&scale, &inputs);
            let got = generalized_median(&estimates, s).unwrap();
            let mut got_set: Vec<Counts> = got.medians.iter().map(counts).collect();
            let mut want_set = want.medians.clone();
            got_set.sort();
            want_set.sort();
            assert_eq!((got_set, got.deviation), (want_set, want.deviation));
            assert_eq!(counts(got.representative()), representative(&want.medians));

            let want = median_over(&inputs, &inputs);
            let got = set_median(&estimates).unwrap();
            assert_eq!(got.deviation, want.deviation);
            assert!(got.medians.iter().all(|m| want.medians.contains(&counts(m))));
        }
    }
}

#[test]
fn choice_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let scale = interval_scale(4, 3);
    for round in 0..150 {
        let m = rng.random_range(1..=4);
        let groups: Vec<Vec<(String, Counts, f64)>> = (0..m)
            .map(|g| {
                (0..rng.random_range(1..=4))
                    .map(|j| {
                        (
                            format!("g{g}i{j}"),
                            random_interval(&mut rng, &scale),
                            rng.random_range(0..12) as f64,
                        )
                    })
                    .collect()
            })
            .collect();
        let cheapest: f64 = groups
            .iter()
            .map(|g| g.iter().map(|i| i.2).fold(f64::INFINITY, f64::min))
            .sum();
        let budget = cheapest + rng.random_range(0..25) as f64;
        let instance = ChoiceInstance::new(
            p43(),
            budget,
            groups
                .iter()
                .map(|g| g.iter().map(|(id, c, a)| (id.clone(), est(c), *a)).collect())
                .collect(),
        )
        .unwrap();
        let got = solve(&instance).unwrap();
        let want = choice_oracle(&scale, &groups, budget);
        assert_eq!(got.len(), want.len(), "round {round}");
        for w in &want {
            let g = got
                .iter()
                .find(|g| counts(&g.median) == w.median)
                .unwrap_or_else(|| panic!("round {round}: median {:?} missing", w.median));
            assert_eq!(g.selection, w.ids, "round {round}");
            assert_eq!(g.deviation, w.deviation);
            assert!((g.total_cost - w.cost).abs() < 1e-9);
        }
    }
}

#[test]
fn fronts_match_flat_enumeration() {
    let model = builtin_dataset();
    for comp in ["D", "E", "F"] {
        let front = synthesize_component(&model, comp).unwrap();
        let mut got: Vec<(Vec<String>, u32, Counts)> = front
            .solutions
            .iter()
            .map(|s| (s.selection.values().cloned().collect(), s.w, counts(&s.e)))
            .collect();
        let mut want = flat_front(&model, comp);
        got.sort();
        want.sort();
        assert_eq!(got, want, "{comp}");
    }
}
