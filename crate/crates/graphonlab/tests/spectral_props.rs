mod common;

use graphonlab::density::hom_rational;
use graphonlab::forcing::{assemble_wf, els_family};
use graphonlab::graph::SmallGraph;
use graphonlab::graphon::StepGraphon;
use graphonlab::rational::{rat, to_f64, Rational};
use graphonlab::spectral::{omega, step_spectrum};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn split(w: &StepGraphon, i: usize) -> StepGraphon {
    let k = w.parts();
    let idx: Vec<usize> = (0..k).flat_map(|p| if p == i { vec![p, p] } else { vec![p] }).collect();
    let measures = idx
        .iter()
        .map(|&p| if p == i { w.measure(p) / rat(2, 1) } else { w.measure(p).clone() })
        .collect();
    let values = idx.iter().map(|&a| idx.iter().map(|&b| w.block(a, b).clone()).collect()).collect();
    StepGraphon::new(measures, values).unwrap()
}

fn brute_omega(w: &StepGraphon) -> Rational {
    let k = w.parts();
    assert!(k <= 16);
    let mut best = Rational::zero();
    for mask in 0u32..1 << k {
        let set: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        if set.iter().all(|&a| set.iter().all(|&b| w.block(a, b).is_one())) {
            let m: Rational = set.iter().map(|&i| w.measure(i).clone()).sum();
            if m > best {
                best = m;
            }
        }
    }
    best
}

#[test]
fn power_sums_match_exact_integrals() {
    let mut r = common::rng(23);
    for _ in 0..20 {
        let w = common::random_step(&mut r, 5, 10);
        let sp = step_spectrum(&w).unwrap();
        let k = w.parts();
        let sq: Rational = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| w.measure(i) * w.measure(j) * w.block(i, j) * w.block(i, j))
            .sum();
        assert!((sp.power_sum(2) - to_f64(&sq)).abs() < 1e-10);
        let c4 = hom_rational(&SmallGraph::cycle(4), &w);
        assert!((sp.power_sum(4) - to_f64(&c4)).abs() < 1e-10);
    }
}

#[test]
fn omega_of_the_block_layout() {
    for n in [3, 4] {
        let wf = assemble_wf(&els_family(n, 1).unwrap()).unwrap();
        if wf.parts() <= 16 {
            assert_eq!(omega(&wf).unwrap(), brute_omega(&wf));
        }
        let m = els_family(n, 1).unwrap().m();
        assert_eq!(omega(&wf).unwrap(), rat(1, m as i64 + 2));
    }
    let mut r = common::rng(29);
    for _ in 0..20 {
        let w = common::random_step(&mut r, 6, 2);
        assert_eq!(omega(&w).unwrap(), brute_omega(&w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn spectrum_ignores_part_order(w in common::step_strategy(4), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let order: Vec<usize> = perm.iter().copied().filter(|&i| i < w.parts()).collect();
        let p = w.permute(&order).unwrap();
        let (a, b) = (step_spectrum(&w).unwrap().eigenvalues, step_spectrum(&p).unwrap().eigenvalues);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omega_is_a_weak_isomorphism_invariant(
        w in common::step_strategy(5),
        perm in Just([0usize, 1, 2, 3, 4]).prop_shuffle(),
        i in 0usize..5,
    ) {
        let order: Vec<usize> = perm.iter().copied().filter(|&j| j < w.parts()).collect();
        let o = omega(&w).unwrap();
        prop_assert_eq!(omega(&w.permute(&order).unwrap()).unwrap(), o.clone());
        prop_assert_eq!(omega(&split(&w, i % w.parts())).unwrap(), o);
    }
}
