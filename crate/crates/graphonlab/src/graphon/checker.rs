//! The checker graphon `W_C^r`: ones on the diagonal blocks of the intervals
//! `I_k = [1 - 2^{1-k}, 1 - 2^{-k})`, each split into `2^{(k-1)(r-1)}` blocks.

use super::{overlap, Descriptor, GraphonKernel, Interval, Kernel};
use crate::rational::{pow2, Rational};
use num_traits::One;

pub const DEFAULT_DEPTH: u32 = 40;

/// Position of a coordinate in the level structure. Levels beyond the depth
/// collapse into one tail level `depth + 1` covering `[1 - 2^{-depth}, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckerLevel {
    pub k: u32,
    pub lo: f64,
    pub len: f64,
    pub tail: bool,
}

pub fn checker_level(x: f64, depth: u32) -> CheckerLevel {
    let lo_of = |k: u32| 1.0 - (-(k as f64 - 1.0)).exp2();
    let gap = 1.0 - x;
    let mut k = if gap > 0.0 {
        ((-gap.log2()).floor() as i64 + 1).clamp(1, depth as i64 + 1) as u32
    } else {
        depth + 1
    };
    while k > 1 && x < lo_of(k) {
        k -= 1;
    }
    while k <= depth && x >= lo_of(k + 1) {
        k += 1;
    }
    if k > depth {
        let len = (-(depth as f64)).exp2();
        CheckerLevel {
            k: depth + 1,
            lo: 1.0 - len,
            len,
            tail: true,
        }
    } else {
        CheckerLevel {
            k,
            lo: lo_of(k),
            len: (-(k as f64)).exp2(),
            tail: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckerGraphon {
    pub r: u32,
    pub depth: u32,
}

pub fn checker_graphon(r: u32) -> CheckerGraphon {
    CheckerGraphon::new(r, DEFAULT_DEPTH)
}

impl CheckerGraphon {
    pub fn new(r: u32, depth: u32) -> Self {
        assert!(r >= 1 && (1..=1000).contains(&depth));
        CheckerGraphon { r, depth }
    }

    /// The block containing `x` as `(level, lo, hi)`.
    pub fn block(&self, x: f64) -> (u32, f64, f64) {
        let lv = checker_level(x, self.depth);
        if lv.tail || self.r == 1 {
            return (lv.k, lv.lo, lv.lo + lv.len);
        }
        let nb = ((lv.k - 1) as f64 * (self.r - 1) as f64).exp2();
        let b = ((x - lv.lo) / lv.len * nb).floor();
        let size = lv.len / nb;
        (lv.k, lv.lo + b * size, lv.lo + (b + 1.0) * size)
    }

    fn block_id(&self, x: f64) -> (u32, f64) {
        let lv = checker_level(x, self.depth);
        if lv.tail || self.r == 1 {
            return (lv.k, 0.0);
        }
        let nb = ((lv.k - 1) as f64 * (self.r - 1) as f64).exp2();
        (lv.k, ((x - lv.lo) / lv.len * nb).floor())
    }

    /// `I_k` as an exact interval, `1 <= k <= depth`.
    pub fn level_interval(k: u32) -> Interval {
        let one = Rational::one();
        Interval::new(&one - pow2(1 - k as i64), &one - pow2(-(k as i64))).expect("valid level")
    }
}

impl Kernel for CheckerGraphon {
    fn value(&self, x: f64, y: f64) -> f64 {
        if self.block_id(x) == self.block_id(y) {
            1.0
        } else {
            0.0
        }
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let (_, a, b) = self.block(x);
        overlap(a, b, lo, hi)
    }
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.row_mass(y, lo, hi)
    }
    fn descriptor(&self) -> Descriptor {
        Descriptor::Checker(self.r)
    }
}

impl GraphonKernel for CheckerGraphon {}
