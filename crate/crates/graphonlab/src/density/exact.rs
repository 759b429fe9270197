//! Exact block sums over part assignments of step graphons.

use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::graph::SmallGraph;
use crate::graphon::{RealStep, StepGraphon};
use crate::rational::Rational;

pub trait Scalar: Clone + Zero + One + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl Scalar for f64 {}
impl Scalar for Rational {}

/// Measures and block values in a chosen arithmetic.
#[derive(Clone, Debug)]
pub struct BlockData<S> {
    pub measures: Vec<S>,
    pub values: Vec<S>,
}

impl<S: Scalar> BlockData<S> {
    pub fn parts(&self) -> usize {
        self.measures.len()
    }
}

impl From<&StepGraphon> for BlockData<Rational> {
    fn from(w: &StepGraphon) -> Self {
        BlockData {
            measures: w.measures().to_vec(),
            values: w.values().iter().flatten().cloned().collect(),
        }
    }
}

impl From<&StepGraphon> for BlockData<f64> {
    fn from(w: &StepGraphon) -> Self {
        let r = w.to_real();
        BlockData {
            measures: r.measures,
            values: r.values,
        }
    }
}

impl From<&RealStep> for BlockData<f64> {
    fn from(w: &RealStep) -> Self {
        BlockData {
            measures: w.measures.clone(),
            values: w.values.clone(),
        }
    }
}

/// `∫ ∏_{E} W ∏_{non-E} (1-W)` when `induced`, else `∫ ∏_{E} W`.
pub fn block_integral<S: Scalar>(h: &SmallGraph, w: &BlockData<S>, induced: bool) -> S {
    let n = h.n();
    if n == 0 {
        return S::one();
    }
    let k = w.parts();
    let order = h.bfs_order();
    let one_minus: Vec<S> = w.values.iter().map(|v| S::one() - v.clone()).collect();
    let mut assign = vec![0usize; n];
    let mut total = S::zero();
    descend(h, w, &one_minus, induced, &order, 0, &mut assign, S::one(), &mut total, k);
    total
}

#[allow(clippy::too_many_arguments)]
fn descend<S: Scalar>(
    h: &SmallGraph,
    w: &BlockData<S>,
    one_minus: &[S],
    induced: bool,
    order: &[usize],
    depth: usize,
    assign: &mut [usize],
    acc: S,
    total: &mut S,
    k: usize,
) {
    if depth == order.len() {
        *total = total.clone() + acc;
        return;
    }
    let v = order[depth];
    'parts: for p in 0..k {
        let mut f = acc.clone() * w.measures[p].clone();
        for &u in &order[..depth] {
            let q = assign[u];
            let factor = if h.has_edge(u, v) {
                &w.values[p * k + q]
            } else if induced {
                &one_minus[p * k + q]
            } else {
                continue;
            };
            if factor.is_zero() {
                continue 'parts;
            }
            f = f * factor.clone();
        }
        assign[v] = p;
        descend(h, w, one_minus, induced, order, depth + 1, assign, f, total, k);
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `n!/|Aut(H)|`, the number of labelled copies of `H` on its vertex set.
pub fn labelled_copies(h: &SmallGraph) -> u64 {
    factorial(h.n()) / h.automorphism_count()
}

pub fn hom_exact<S: Scalar>(h: &SmallGraph, w: &BlockData<S>) -> S {
    block_integral(h, w, false)
}

pub fn induced_exact<S: Scalar + From<u64>>(h: &SmallGraph, w: &BlockData<S>) -> S {
    S::from(labelled_copies(h)) * block_integral(h, w, true)
}

/// Exact induced density with a rational result.
pub fn induced_rational(h: &SmallGraph, w: &StepGraphon) -> Rational {
    let data = BlockData::<Rational>::from(w);
    Rational::from_integer(labelled_copies(h).into()) * block_integral(h, &data, true)
}

pub fn hom_rational(h: &SmallGraph, w: &StepGraphon) -> Rational {
    block_integral(h, &BlockData::<Rational>::from(w), false)
}

pub fn induced_f64(h: &SmallGraph, w: &BlockData<f64>) -> f64 {
    labelled_copies(h) as f64 * block_integral(h, w, true)
}
