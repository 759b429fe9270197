//! Preparing `W_F`: the choice of `ε` and the sort by degree.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graphon::{Interval, StepGraphon};
use crate::rational::{self, int, pow2, Rational};

/// `ε = 1/(2^r + 1)`, `M = 2^{r+2}`, `m = r + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub r: u32,
    pub epsilon: Rational,
    pub big_m: usize,
    pub small_m: usize,
}

impl Params {
    pub fn new(r: u32) -> Result<Self> {
        if !(1..=12).contains(&r) {
            return Err(Error::Range(format!("r = {r} (expected 1..=12)")));
        }
        Ok(Params {
            r,
            epsilon: Rational::new(1.into(), (1i64 << r).checked_add(1).expect("small r").into()),
            big_m: 1 << (r + 2),
            small_m: r as usize + 2,
        })
    }

    pub fn epsilon_f(&self) -> f64 {
        rational::to_f64(&self.epsilon)
    }

    pub fn part_count(&self) -> usize {
        3 * self.big_m + 3 * self.small_m + 13
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub params: Params,
    /// Factor applied to the part measures of the input.
    pub scale: Rational,
    pub wf: StepGraphon,
}

/// Picks the largest `ε = 1/(2^r+1)` not above the request (strictly below
/// it when some part of `W_F` has degree one), shrinks `W_F` into
/// `[0, (1-ε_req)/(1-ε))` and pads with a null part.
pub fn normalize_input(wf: &StepGraphon, eps_request: &Rational) -> Result<Normalized> {
    if !eps_request.is_positive() || eps_request >= &Rational::one() {
        return Err(Error::Range(format!("epsilon {}", rational::format(eps_request))));
    }
    let full = wf.degrees().iter().any(|d| d >= &Rational::one());
    let mut r = 1;
    loop {
        let p = Params::new(r)?;
        if &p.epsilon < eps_request || (&p.epsilon == eps_request && !full) {
            break;
        }
        r += 1;
    }
    let params = Params::new(r)?;
    let one = Rational::one();
    let scale = (&one - eps_request) / (&one - &params.epsilon);
    let scale = if scale > one { one.clone() } else { scale };
    let wf = if scale.is_one() {
        wf.clone()
    } else {
        let k = wf.parts();
        let mut measures: Vec<Rational> = wf.measures().iter().map(|m| m * &scale).collect();
        measures.push(&one - &scale);
        let values = (0..=k)
            .map(|i| {
                (0..=k)
                    .map(|j| if i < k && j < k { wf.block(i, j).clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        StepGraphon::new(measures, values)?
    };
    Ok(Normalized { params, scale, wf })
}

/// `W_F` with parts sorted by degree, and the intervals `Q_1..Q_M` collecting
/// the parts whose degree lies in `[(k-1)/M, k/M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReorderedInput {
    pub graphon: StepGraphon,
    /// Part `i` of `graphon` is part `order[i]` of the input.
    pub order: Vec<usize>,
    /// Band `k` (1-based) of each part of `graphon`.
    pub bands: Vec<usize>,
    pub q: Vec<Interval>,
}

impl ReorderedInput {
    pub fn q_measures(&self) -> Vec<Rational> {
        self.q.iter().map(Interval::len).collect()
    }
}

pub fn monotone_reorder(wf: &StepGraphon, big_m: usize) -> Result<ReorderedInput> {
    if big_m == 0 {
        return Err(Error::Range("M must be positive".into()));
    }
    let deg = wf.degrees();
    let mut order: Vec<usize> = (0..wf.parts()).collect();
    order.sort_by(|&a, &b| deg[a].cmp(&deg[b]));
    let graphon = wf.permute(&order)?;
    let mm = int(big_m as i64);
    let mut bands = Vec::with_capacity(order.len());
    for &o in &order {
        let scaled = &deg[o] * &mm;
        let band = scaled.numer().div_floor(scaled.denom()).to_usize().unwrap_or(usize::MAX).saturating_add(1);
        if band > big_m {
            return Err(Error::DegreeOne(format!("part {} of W_F has degree {}", o + 1, rational::format(&deg[o]))));
        }
        bands.push(band);
    }
    let mut q = Vec::with_capacity(big_m);
    let mut at = Rational::zero();
    for k in 1..=big_m {
        let len: Rational = bands
            .iter()
            .zip(graphon.measures())
            .filter(|(&b, _)| b == k)
            .map(|(_, m)| m.clone())
            .sum();
        let hi = &at + &len;
        q.push(if len.is_zero() { Interval::empty_at(at.clone())? } else { Interval::new(at.clone(), hi.clone())? });
        at = hi;
    }
    Ok(ReorderedInput { graphon, order, bands, q })
}

/// `1/(2^r + 1)`.
pub fn epsilon_of(r: u32) -> Rational {
    Rational::one() / (pow2(r as i64) + Rational::one())
}
