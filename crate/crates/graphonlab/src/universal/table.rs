//! The parts of `W_0`, their measures, pre-degrees and degree offsets.

use std::ops::Range;

use num_traits::{One, Zero};

use super::input::Params;
use crate::constraint::{Part, PartTable};
use crate::error::{Error, Result};
use crate::graphon::Interval;
use crate::rational::{self, int, pow2, Rational};

/// Index ranges of the part groups in table order.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub a: Range<usize>,
    /// `B_A..B_F`.
    pub b_head: Range<usize>,
    pub b_g: Range<usize>,
    /// `B_P, B_Q, B_R`.
    pub b_tail: Range<usize>,
    pub c: Range<usize>,
    pub d: Range<usize>,
    pub e: Range<usize>,
    pub f: Range<usize>,
    pub g1: usize,
    pub g2: usize,
}

impl Blocks {
    pub fn new(p: &Params) -> Self {
        let (mm, m) = (p.big_m, p.small_m);
        let a = 0..mm;
        let b_head = mm..mm + 6;
        let b_g = b_head.end..b_head.end + mm;
        let b_tail = b_g.end..b_g.end + 3;
        let c = b_tail.end..b_tail.end + m + 1;
        let d = c.end..c.end + m + 1;
        let e = d.end..d.end + m;
        let f = e.end..e.end + mm;
        let g1 = f.end;
        Blocks {
            a,
            b_head,
            b_g,
            b_tail,
            c,
            d,
            e,
            f,
            g1,
            g2: g1 + 1,
        }
    }

    pub fn b(&self) -> Range<usize> {
        self.b_head.start..self.b_tail.end
    }

    pub fn len(&self) -> usize {
        self.g2 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    let mut k = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// `δ` of the part at position `i` (0-based): `ε/8 + (ε/8)·frac(√p)` for the
/// `(i+1)`-th prime `p`.
pub fn delta(epsilon: f64, prime: u64) -> f64 {
    let s = (prime as f64).sqrt();
    epsilon / 8.0 * (1.0 + s.fract())
}

pub fn build_part_table(r: u32, q_measures: &[Rational]) -> Result<PartTable> {
    let p = Params::new(r)?;
    let (mm, m) = (p.big_m, p.small_m);
    if q_measures.len() != mm {
        return Err(Error::Size(format!("{} Q measures for M = {mm}", q_measures.len())));
    }
    let total: Rational = q_measures.iter().sum();
    if !total.is_one() {
        return Err(Error::MeasureSum(rational::format(&total)));
    }
    let eps = &p.epsilon;
    let one = Rational::one();
    let e20 = eps / int(20);
    let e4 = eps / int(4);
    let e2 = eps / int(2);
    let fourteenth = &e20 / int(14);
    let mut rows: Vec<(String, char, Rational, Option<Rational>)> = Vec::with_capacity(p.part_count());
    for (k, q) in q_measures.iter().enumerate() {
        rows.push((format!("A{}", k + 1), 'A', (&one - eps) * q, Some(eps * int(k as i64 + 2) / int(4))));
    }
    for z in ["A", "B", "C", "D", "E", "F"] {
        rows.push((format!("B_{z}"), 'B', fourteenth.clone(), Some(e4.clone())));
    }
    for (k, q) in q_measures.iter().enumerate() {
        rows.push((format!("B_G{}", k + 1), 'B', &fourteenth * q, Some(e4.clone())));
    }
    rows.push(("B_P".into(), 'B', fourteenth.clone(), Some(e4.clone())));
    rows.push(("B_Q".into(), 'B', &fourteenth * int(5), Some(e4.clone())));
    rows.push(("B_R".into(), 'B', fourteenth.clone(), Some(e4.clone())));
    for g in ['C', 'D'] {
        for k in 1..=m as i64 {
            rows.push((format!("{g}{k}"), g, &e20 * pow2(-k), Some((&one - eps) * pow2(1 - k) + &e4)));
        }
        rows.push((format!("{g}_inf"), g, &e20 * pow2(-(m as i64)), Some(e2.clone())));
    }
    for k in 1..m as i64 {
        rows.push((format!("E{k}"), 'E', &e20 * pow2(-k), Some((&one - eps) * pow2(-k) + &e4)));
    }
    rows.push(("E_inf".into(), 'E', &e20 * pow2(1 - m as i64), Some(e2.clone())));
    for k in 1..=mm {
        rows.push((format!("F{k}"), 'F', &e20 / int(mm as i64), Some(eps * int(k as i64 + 1) / int(4))));
    }
    rows.push(("G1".into(), 'G', e2, None));
    rows.push(("G2".into(), 'G', e4, None));

    let eps_f = p.epsilon_f();
    let ps = primes(rows.len());
    let mut at = Rational::zero();
    let mut parts = Vec::with_capacity(rows.len());
    for ((name, group, measure, pre_degree), prime) in rows.into_iter().zip(ps) {
        let hi = &at + &measure;
        let interval = if measure.is_zero() { Interval::empty_at(at.clone())? } else { Interval::new(at, hi.clone())? };
        parts.push(Part {
            name,
            group: Some(group),
            interval,
            pre_degree,
            delta: Some(delta(eps_f, prime)),
        });
        at = hi;
    }
    PartTable::new(parts)
}
