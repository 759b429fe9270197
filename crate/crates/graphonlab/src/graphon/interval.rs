//! Half-open intervals with rational endpoints, dyadic indices and the affine
//! coordinate maps between a part group and [0,1).

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, pow2, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational::serde_rational")]
    lo: Rational,
    #[serde(with = "rational::serde_rational")]
    hi: Rational,
}

impl Interval {
    /// `[lo, hi)` with `0 <= lo < hi <= 1`.
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo.is_negative() || hi > Rational::one() || lo >= hi {
            return Err(Error::Range(format!(
                "[{}, {})",
                rational::format(&lo),
                rational::format(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// The empty interval `[at, at)`, used for null parts.
    pub fn empty_at(at: Rational) -> Result<Self> {
        if at.is_negative() || at > Rational::one() {
            return Err(Error::Range(rational::format(&at)));
        }
        Ok(Interval {
            lo: at.clone(),
            hi: at,
        })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn lo_f(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn len_f(&self) -> f64 {
        to_f64(&self.len())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo_f() <= x && x < self.hi_f()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}, {})",
            rational::format(&self.lo),
            rational::format(&self.hi)
        )
    }
}

/// `I_{s,t} = [(t-1)/2^{s-1}, t/2^{s-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicIndex {
    pub s: u32,
    pub t: u64,
}

impl DyadicIndex {
    pub fn new(s: u32, t: u64) -> Result<Self> {
        if s == 0 || s > 63 || t == 0 || t > (1u64 << (s - 1)) {
            return Err(Error::Index(format!("dyadic (s={s}, t={t})")));
        }
        Ok(DyadicIndex { s, t })
    }

    pub fn interval(&self) -> Interval {
        let w = pow2(-(self.s as i64 - 1));
        let lo = &w * Rational::from_integer((self.t - 1).into());
        let hi = &w * Rational::from_integer(self.t.into());
        Interval { lo, hi }
    }

    /// All intervals of order `s`, left to right.
    pub fn order(s: u32) -> Vec<DyadicIndex> {
        (1..=(1u64 << (s - 1)))
            .map(|t| DyadicIndex { s, t })
            .collect()
    }
}

pub fn dyadic_interval(idx: DyadicIndex) -> Interval {
    idx.interval()
}

/// `γ(x) = x·|∪X| + min ∪X` for a contiguous group.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaMap {
    lo: Rational,
    len: Rational,
    lo_f: f64,
    len_f: f64,
}

impl GammaMap {
    pub fn of_group<'a>(parts: impl IntoIterator<Item = &'a Interval>) -> Result<Self> {
        let mut sorted: Vec<&Interval> = parts.into_iter().collect();
        sorted.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let first = sorted.first().ok_or(Error::NonContiguous)?;
        let lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for iv in &sorted[1..] {
            if iv.lo != hi {
                return Err(Error::NonContiguous);
            }
            hi = iv.hi.clone();
        }
        if hi <= lo {
            return Err(Error::NonContiguous);
        }
        Ok(Self::affine(lo.clone(), hi - lo))
    }

    pub fn identity() -> Self {
        Self::affine(Rational::zero(), Rational::one())
    }

    fn affine(lo: Rational, len: Rational) -> Self {
        GammaMap {
            lo_f: to_f64(&lo),
            len_f: to_f64(&len),
            lo,
            len,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn len(&self) -> &Rational {
        &self.len
    }

    pub fn len_f(&self) -> f64 {
        self.len_f
    }

    pub fn apply(&self, x: f64) -> f64 {
        x * self.len_f + self.lo_f
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (y - self.lo_f) / self.len_f
    }

    pub fn apply_exact(&self, x: &Rational) -> Rational {
        x * &self.len + &self.lo
    }
}

pub fn gamma_map<'a>(parts: impl IntoIterator<Item = &'a Interval>) -> Result<GammaMap> {
    GammaMap::of_group(parts)
}
