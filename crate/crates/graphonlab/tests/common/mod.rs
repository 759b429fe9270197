#![allow(dead_code)]

use graphonlab::graphon::StepGraphon;
use graphonlab::rational::{rat, Rational};
use graphonlab::universal::{universal, W0};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn assemble(weights: &[i64], vals: &[i64], denom: i64) -> StepGraphon {
    let k = weights.len();
    let total: i64 = weights.iter().sum();
    let measures = weights.iter().map(|&w| rat(w, total)).collect();
    let mut values = vec![vec![Rational::from_integer(0.into()); k]; k];
    let mut it = vals.iter();
    for i in 0..k {
        for j in i..k {
            let v = rat(*it.next().unwrap(), denom);
            values[i][j] = v.clone();
            values[j][i] = v;
        }
    }
    StepGraphon::new(measures, values).unwrap()
}

/// Up to `max_parts` parts with measures `w_i/Σw` and values on a grid of
/// step `1/denom`.
pub fn random_step(r: &mut impl Rng, max_parts: usize, denom: i64) -> StepGraphon {
    let k = r.random_range(1..=max_parts);
    let weights: Vec<i64> = (0..k).map(|_| r.random_range(1..=9)).collect();
    let vals: Vec<i64> = (0..k * (k + 1) / 2).map(|_| r.random_range(0..=denom)).collect();
    assemble(&weights, &vals, denom)
}

pub fn step_strategy(max_parts: usize) -> impl Strategy<Value = StepGraphon> {
    (1..=max_parts).prop_flat_map(|k| {
        (prop::collection::vec(1i64..=9, k), prop::collection::vec(0i64..=12, k * (k + 1) / 2))
            .prop_map(|(w, v)| assemble(&w, &v, 12))
    })
}

/// The four-part `W_F` used throughout: all degrees below 1, all distinct.
pub fn sample_wf() -> StepGraphon {
    let q = |a, b| rat(a, b);
    StepGraphon::new(
        vec![q(1, 4); 4],
        vec![
            vec![q(1, 1), q(1, 2), q(1, 4), q(0, 1)],
            vec![q(1, 2), q(0, 1), q(3, 4), q(1, 3)],
            vec![q(1, 4), q(3, 4), q(1, 2), q(1, 5)],
            vec![q(0, 1), q(1, 3), q(1, 5), q(1, 10)],
        ],
    )
    .unwrap()
}

pub fn sample_w0() -> W0 {
    universal(&sample_wf(), &rat(1, 5), graphonlab::graphon::DEFAULT_DEPTH).unwrap()
}
