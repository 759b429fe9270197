mod common;

use graphonlab::graphon::{checker_graphon, ConstantKernel, DyadicIndex, HalfGraphon, Kernel};
use graphonlab::rational::{pow2, rat, to_f64};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn symmetric_and_bounded(w: &dyn Kernel, seed: u64, pairs: usize) {
    let mut r = common::rng(seed);
    for _ in 0..pairs {
        let (x, y) = (r.random::<f64>(), r.random::<f64>());
        let (a, b) = (w.value(x, y), w.value(y, x));
        assert_eq!(a, b, "asymmetric at ({x}, {y})");
        assert!((0.0..=1.0).contains(&a), "value {a} at ({x}, {y})");
    }
}

#[test]
fn every_kernel_family_is_symmetric() {
    symmetric_and_bounded(&HalfGraphon, 1, 100_000);
    symmetric_and_bounded(&ConstantKernel(0.3), 2, 1000);
    for r in 1..=3 {
        symmetric_and_bounded(&checker_graphon(r), 3 + r as u64, 100_000);
    }
    symmetric_and_bounded(&common::random_step(&mut common::rng(9), 5, 10), 10, 100_000);
    let w0 = common::sample_w0();
    symmetric_and_bounded(w0.tiled(), 11, 100_000);
}

#[test]
fn checker_squares_telescope() {
    for k in [1u32, 5, 20, 40] {
        let s = (1..=k)
            .map(|i| {
                let l = graphonlab::graphon::CheckerGraphon::level_interval(i).len();
                &l * &l
            })
            .fold(rat(0, 1), |a, b| a + b);
        assert_eq!(s, rat(1, 3) - pow2(-2 * k as i64) / rat(3, 1));
    }
}

proptest! {
    #[test]
    fn step_values_symmetric(w in common::step_strategy(5), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assert_eq!(w.value(x, y), w.value(y, x));
        let v = w.value(x, y);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn dyadic_orders_abut(s in 1u32..12) {
        let ivs: Vec<_> = DyadicIndex::order(s).iter().map(|d| d.interval()).collect();
        prop_assert!(ivs[0].lo().is_zero());
        prop_assert!(ivs.last().unwrap().hi().is_one());
        for iv in &ivs {
            prop_assert_eq!(iv.len(), pow2(-(s as i64 - 1)));
        }
        for pair in ivs.windows(2) {
            prop_assert_eq!(pair[0].hi(), pair[1].lo());
        }
    }

    #[test]
    fn boundaries_belong_to_the_right(w in common::step_strategy(5)) {
        for i in 1..w.parts() {
            let iv = w.part_interval(i);
            let b = to_f64(iv.lo());
            if to_f64(w.part_interval(i - 1).lo()) < b && b < to_f64(iv.hi()) {
                prop_assert!(iv.contains(b));
                prop_assert!(!w.part_interval(i - 1).contains(b));
                prop_assert_eq!(w.value(b, b), w.value(to_f64(iv.lo()) + 1e-12, to_f64(iv.lo()) + 1e-12));
            }
        }
    }
}
