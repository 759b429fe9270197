mod common;

use graphonlab::config::RunConfig;
use graphonlab::density::{densall_decompose, hom_rational, induced_density, induced_density_mc, induced_rational};
use graphonlab::graph::{enumerate_all, SmallGraph};
use graphonlab::graphon::StepGraphon;
use graphonlab::rational::{rat, to_f64, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Sums the labelled induced probability over every labelled graph on
/// `|H|` vertices isomorphic to `H`.
fn brute_induced(h: &SmallGraph, w: &StepGraphon) -> Rational {
    let n = h.n();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let k = w.parts();
    let mut total = Rational::zero();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = SmallGraph::new(n, &edges).unwrap();
        if !g.is_isomorphic(h) {
            continue;
        }
        let mut assign = vec![0usize; n];
        loop {
            let mut p: Rational = assign.iter().map(|&i| w.measure(i).clone()).product();
            for (i, &(a, b)) in pairs.iter().enumerate() {
                let v = w.block(assign[a], assign[b]);
                p *= if mask >> i & 1 == 1 { v.clone() } else { Rational::one() - v };
            }
            total += p;
            let mut i = 0;
            while i < n && assign[i] == k - 1 {
                assign[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            assign[i] += 1;
        }
    }
    total
}

#[test]
fn induced_matches_brute_force() {
    let mut r = common::rng(5);
    for _ in 0..6 {
        let w = common::random_step(&mut r, 4, 10);
        for n in 1..=4 {
            for h in enumerate_all(n).unwrap() {
                assert_eq!(induced_rational(&h, &w), brute_induced(&h, &w), "{h}");
            }
        }
    }
}

#[test]
fn monte_carlo_within_four_standard_errors() {
    let w = common::random_step(&mut common::rng(17), 4, 10);
    let graphs = [SmallGraph::path(3), SmallGraph::cycle(4), SmallGraph::k4_minus()];
    for h in &graphs {
        let exact = to_f64(&induced_rational(h, &w));
        let mut hits = 0;
        for seed in 1..=100 {
            let cfg = RunConfig {
                seed,
                samples: 20_000,
                ..RunConfig::default()
            };
            let est = induced_density_mc(h, &w, &cfg);
            if (est.estimate - exact).abs() <= 4.0 * est.std_error {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{h}: {hits}/100");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn densities_sum_to_one(w in common::step_strategy(4), k in 1usize..=4) {
        let s: Rational = enumerate_all(k).unwrap().iter().map(|h| induced_rational(h, &w)).sum();
        prop_assert_eq!(s, Rational::one());
    }

    #[test]
    fn relabelling_keeps_density(w in common::step_strategy(4), idx in 0usize..11, perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let graphs = enumerate_all(4).unwrap();
        let h = &graphs[idx % graphs.len()];
        let g = h.relabel(&perm);
        prop_assert_eq!(induced_rational(h, &w), induced_rational(&g, &w));
        let cfg = RunConfig::default();
        prop_assert_eq!(induced_density(h, &w, &cfg).exact, induced_density(&g, &w, &cfg).exact);
    }

    #[test]
    fn c4_expansion(w in common::step_strategy(5)) {
        let d = |h: &SmallGraph| induced_rational(h, &w);
        let lhs = d(&SmallGraph::cycle(4)) / rat(3, 1) + d(&SmallGraph::k4_minus()) / rat(3, 1) + d(&SmallGraph::complete(4));
        prop_assert_eq!(lhs, hom_rational(&SmallGraph::cycle(4), &w));
    }

    #[test]
    fn decomposition_uses_connected_graphs(idx in 0usize..34) {
        let graphs = enumerate_all(5).unwrap();
        let h = &graphs[idx % graphs.len()];
        let p = densall_decompose(h).unwrap();
        for g in p.indeterminates() {
            prop_assert!(g.is_connected() && g.n() >= 2 && g.n() <= 5, "{g}");
        }
    }
}
