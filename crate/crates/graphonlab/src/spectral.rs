//! Weak-isomorphism discriminants: step-graphon spectra, the clique measure
//! ω, and pushforward density certificates along interval maps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::density::{hom_rational, pair_density_exact};
use crate::error::{Error, Result};
use crate::graph::SmallGraph;
use crate::graphon::{DyadicIndex, Interval, Kernel, StepGraphon};
use crate::mc;
use crate::rational::{self, to_f64, Rational};

pub const OMEGA_MAX_PARTS: usize = 24;

/// Eigenvalues ordered by non-increasing absolute value.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn power_sum(&self, k: i32) -> f64 {
        crate::mc::neumaier(self.eigenvalues.iter().map(|l| l.powi(k)))
    }
}

/// Spectrum of `D^{1/2} V D^{1/2}`, the non-zero spectrum of the integral
/// operator of a step graphon.
pub fn step_spectrum(w: &StepGraphon) -> Result<Spectrum> {
    let k = w.parts();
    let sq: Vec<f64> = (0..k).map(|i| w.measure_f(i).sqrt()).collect();
    let a = DMatrix::from_fn(k, k, |i, j| sq[i] * w.block_f(i, j) * sq[j]);
    let norm = a.norm();
    let eig = SymmetricEigen::new(a.clone());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let residual = (&a * v - v * lambda).norm();
        if residual > 1e-10 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!("eigen residual {residual:e}")));
        }
    }
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    Ok(Spectrum { eigenvalues })
}

/// `ω(W)`: largest total measure of parts whose pairwise blocks, diagonal
/// included, are all 1.
pub fn omega(w: &StepGraphon) -> Result<Rational> {
    let one = Rational::one();
    let cand: Vec<usize> = (0..w.parts()).filter(|&i| w.block(i, i) == &one).collect();
    if cand.len() > OMEGA_MAX_PARTS {
        return Err(Error::Size(format!("{} candidate parts (at most {OMEGA_MAX_PARTS})", cand.len())));
    }
    let c = cand.len();
    let adj: Vec<u32> = (0..c)
        .map(|a| (0..c).filter(|&b| b != a && w.block(cand[a], cand[b]) == &one).fold(0u32, |m, b| m | 1 << b))
        .collect();
    let weights: Vec<Rational> = cand.iter().map(|&i| w.measure(i).clone()).collect();
    let mut best = Rational::zero();
    let all = if c == 32 { u32::MAX } else { (1u32 << c) - 1 };
    clique(&adj, &weights, all, Rational::zero(), &mut best);
    Ok(best)
}

fn clique(adj: &[u32], wts: &[Rational], mut cands: u32, current: Rational, best: &mut Rational) {
    if cands == 0 {
        if current > *best {
            *best = current;
        }
        return;
    }
    let bound: Rational = &current + crate::graph::bits_u32(cands).map(|v| &wts[v]).sum::<Rational>();
    if bound <= *best {
        return;
    }
    while cands != 0 {
        let rest: Rational = crate::graph::bits_u32(cands).map(|v| &wts[v]).sum();
        if &current + rest <= *best {
            return;
        }
        let v = cands.trailing_zeros() as usize;
        cands &= cands - 1;
        clique(adj, wts, cands & adj[v], &current + &wts[v], best);
    }
}

/// One affine piece of an interval map. The target runs from `to_lo` to
/// `to_hi`; `to_lo > to_hi` means the piece reverses orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub from: Interval,
    pub to_lo: Rational,
    pub to_hi: Rational,
}

impl Piece {
    fn slope(&self) -> Rational {
        (&self.to_hi - &self.to_lo) / self.from.len()
    }

    fn target(&self) -> (Rational, Rational) {
        if self.to_lo <= self.to_hi {
            (self.to_lo.clone(), self.to_hi.clone())
        } else {
            (self.to_hi.clone(), self.to_lo.clone())
        }
    }
}

/// Piecewise affine measure-preserving map of [0,1).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMap {
    pieces: Vec<Piece>,
}

impl IntervalMap {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.from.lo().cmp(b.from.lo()));
        let mut at = Rational::zero();
        for p in &pieces {
            if p.from.lo() != &at {
                return Err(Error::NotMeasurePreserving(format!("sources do not partition [0,1) at {}", p.from)));
            }
            at = p.from.hi().clone();
            let (lo, hi) = p.target();
            if lo.is_negative() || hi > Rational::one() {
                return Err(Error::NotMeasurePreserving(format!("target of {} leaves [0,1)", p.from)));
            }
            if p.slope().abs() < Rational::one() {
                return Err(Error::NotMeasurePreserving(format!("piece {} has |slope| < 1", p.from)));
            }
        }
        if !at.is_one() {
            return Err(Error::NotMeasurePreserving("sources do not cover [0,1)".into()));
        }
        let map = IntervalMap { pieces };
        map.check_measure()?;
        Ok(map)
    }

    /// Every target point must collect preimage density exactly 1.
    fn check_measure(&self) -> Result<()> {
        let mut cuts: Vec<Rational> = vec![Rational::zero(), Rational::one()];
        for p in &self.pieces {
            let (lo, hi) = p.target();
            cuts.push(lo);
            cuts.push(hi);
        }
        cuts.sort();
        cuts.dedup();
        for w in cuts.windows(2) {
            let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
            let density: Rational = self
                .pieces
                .iter()
                .filter(|p| {
                    let (lo, hi) = p.target();
                    lo <= mid && mid < hi
                })
                .map(|p| Rational::one() / p.slope().abs())
                .sum();
            if !density.is_one() {
                return Err(Error::NotMeasurePreserving(format!(
                    "preimage density {} on [{}, {})",
                    rational::format(&density),
                    rational::format(&w[0]),
                    rational::format(&w[1])
                )));
            }
        }
        Ok(())
    }

    pub fn identity() -> Self {
        IntervalMap::new(vec![Piece {
            from: Interval::unit(),
            to_lo: Rational::zero(),
            to_hi: Rational::one(),
        }])
        .expect("identity is measure preserving")
    }

    /// `x ↦ k·x mod 1`.
    pub fn multiply_mod(k: u32) -> Self {
        let pieces = (0..k as i64)
            .map(|i| Piece {
                from: Interval::new(rational::rat(i, k as i64), rational::rat(i + 1, k as i64)).expect("valid"),
                to_lo: Rational::zero(),
                to_hi: Rational::one(),
            })
            .collect();
        IntervalMap::new(pieces).expect("measure preserving")
    }

    /// `lo,hi->lo',hi';...`
    pub fn parse(s: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut pos = 0;
        for chunk in s.split(';') {
            let at = pos;
            pos += chunk.len() + 1;
            if chunk.trim().is_empty() {
                continue;
            }
            let (a, b) = chunk
                .split_once("->")
                .ok_or_else(|| Error::parse(at, format!("expected '->' in {chunk:?}")))?;
            let pair = |t: &str| -> Result<(Rational, Rational)> {
                let (x, y) = t
                    .split_once(',')
                    .ok_or_else(|| Error::parse(at, format!("expected 'lo,hi' in {t:?}")))?;
                Ok((rational::parse(x)?, rational::parse(y)?))
            };
            let (lo, hi) = pair(a)?;
            let (to_lo, to_hi) = pair(b)?;
            pieces.push(Piece {
                from: Interval::new(lo, hi)?,
                to_lo,
                to_hi,
            });
        }
        IntervalMap::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn apply(&self, x: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.from.hi_f() <= x).min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        let t = (x - p.from.lo_f()) / p.from.len_f();
        let (a, b) = (to_f64(&p.to_lo), to_f64(&p.to_hi));
        let y = a + t * (b - a);
        y.clamp(0.0, 1.0 - f64::EPSILON / 2.0)
    }

    /// `φ^{-1}(J)` as a union of intervals.
    pub fn preimage(&self, j: &Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let (lo, hi) = p.target();
            let a = (&lo).max(j.lo()).clone();
            let b = (&hi).min(j.hi()).clone();
            if a >= b {
                continue;
            }
            let back = |y: &Rational| p.from.lo() + (y - &p.to_lo) / p.slope();
            let (u, v) = (back(&a), back(&b));
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            out.push(Interval::new(u, v).expect("non-empty preimage"));
        }
        out
    }
}

impl std::fmt::Display for IntervalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self
            .pieces
            .iter()
            .map(|p| {
                format!(
                    "{},{}->{},{}",
                    rational::format(p.from.lo()),
                    rational::format(p.from.hi()),
                    rational::format(&p.to_lo),
                    rational::format(&p.to_hi)
                )
            })
            .collect();
        write!(f, "{}", s.join(";"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardReport {
    pub depth: u32,
    pub squares: usize,
    pub max_discrepancy: Rational,
    fingerprint: String,
}

fn fingerprint(w1: &StepGraphon, w2: &StepGraphon, phi: &IntervalMap) -> String {
    format!("{}|{}|{}", w1.to_json(), w2.to_json(), phi)
}

/// Exact check of `d_{W1}(φ^{-1}J, φ^{-1}J') = d_{W2}(J, J')` over all
/// dyadic `J, J'` of order at most `depth`.
pub fn pushforward_check(w1: &StepGraphon, w2: &StepGraphon, phi: &IntervalMap, depth: u32) -> Result<PushforwardReport> {
    if depth == 0 || depth > 12 {
        return Err(Error::Range(format!("depth {depth} (1..=12)")));
    }
    let mut max = Rational::zero();
    let mut squares = 0;
    for s in 1..=depth {
        let ivs: Vec<Interval> = DyadicIndex::order(s).iter().map(|d| d.interval()).collect();
        let pre: Vec<Vec<Interval>> = ivs.iter().map(|j| phi.preimage(j)).collect();
        for a in 0..ivs.len() {
            for b in 0..ivs.len() {
                let lhs = pair_density_exact(w1, &pre[a], &pre[b]);
                let rhs = pair_density_exact(w2, &[ivs[a].clone()], &[ivs[b].clone()]);
                let d = (lhs - rhs).abs();
                if d > max {
                    max = d;
                }
                squares += 1;
            }
        }
    }
    Ok(PushforwardReport {
        depth,
        squares,
        max_discrepancy: max,
        fingerprint: fingerprint(w1, w2, phi),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: String,
    pub t_c4_w1: String,
    pub t_c4_w2: String,
    pub max_discrepancy: String,
    pub sampled_points: u64,
    pub violations: u64,
}

pub const PULLBACK_SAMPLES: u64 = 10_000;
pub const PULLBACK_TOL: f64 = 1e-9;

/// Compares `t(C4)` of both graphons after a passed pushforward check; when
/// equal, verifies `W1(x,y) = W2(φ(x),φ(y))` at sampled points.
pub fn rigidity_verdict(
    report: &PushforwardReport,
    w1: &StepGraphon,
    w2: &StepGraphon,
    phi: &IntervalMap,
    cfg: &RunConfig,
) -> Result<Verdict> {
    if report.fingerprint != fingerprint(w1, w2, phi) {
        return Err(Error::Precheck("report was computed for different inputs".into()));
    }
    if !report.max_discrepancy.is_zero() {
        return Err(Error::Precheck(format!(
            "pushforward discrepancy {}",
            rational::format(&report.max_discrepancy)
        )));
    }
    let c4 = SmallGraph::cycle(4);
    let (t1, t2) = (hom_rational(&c4, w1), hom_rational(&c4, w2));
    let mut violations = 0;
    let mut sampled = 0;
    let verdict = if t1 == t2 {
        let mut rng = mc::stream(cfg.seed, mc::stream_id(&[0x71_6964]));
        for _ in 0..PULLBACK_SAMPLES {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            if (w1.value(x, y) - w2.value(phi.apply(x), phi.apply(y))).abs() > PULLBACK_TOL {
                violations += 1;
            }
        }
        sampled = PULLBACK_SAMPLES;
        if violations == 0 {
            "pullback-equal"
        } else {
            "pullback-violated"
        }
    } else {
        "unequal"
    };
    Ok(Verdict {
        verdict: verdict.into(),
        t_c4_w1: rational::format(&t1),
        t_c4_w2: rational::format(&t2),
        max_discrepancy: rational::format(&report.max_discrepancy),
        sampled_points: sampled,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn step(m: &[(i64, i64)], v: &[&[(i64, i64)]]) -> StepGraphon {
        StepGraphon::new(
            m.iter().map(|&(a, b)| rat(a, b)).collect(),
            v.iter().map(|r| r.iter().map(|&(a, b)| rat(a, b)).collect()).collect(),
        )
        .unwrap()
    }

    fn halves() -> StepGraphon {
        step(&[(1, 2), (1, 2)], &[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]])
    }

    #[test]
    fn spectrum_examples() {
        let s = step_spectrum(&halves()).unwrap();
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-14 && (s.eigenvalues[1] + 0.5).abs() < 1e-14);
        let c = step_spectrum(&StepGraphon::constant(rat(3, 7)).unwrap()).unwrap();
        assert!((c.eigenvalues[0] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&StepGraphon::constant(rat(1, 1)).unwrap()).unwrap(), rat(1, 1));
        let w = step(&[(1, 2), (1, 2)], &[&[(1, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(omega(&w).unwrap(), rat(1, 2));
        assert_eq!(omega(&halves()).unwrap(), rat(0, 1));
        let tri = step(
            &[(1, 4), (1, 4), (1, 2)],
            &[&[(1, 1), (1, 1), (0, 1)], &[(1, 1), (1, 1), (1, 2)], &[(0, 1), (1, 2), (1, 1)]],
        );
        assert_eq!(omega(&tri).unwrap(), rat(1, 2));
    }

    #[test]
    fn interval_map_text() {
        let phi = IntervalMap::parse("0,1/2->0,1;1/2,1->0,1").unwrap();
        assert_eq!(phi, IntervalMap::multiply_mod(2));
        assert_eq!(IntervalMap::parse(&phi.to_string()).unwrap(), phi);
        assert!((phi.apply(0.75) - 0.5).abs() < 1e-15);
        let rev = IntervalMap::parse("0,1->1,0").unwrap();
        assert!((rev.apply(0.25) - 0.75).abs() < 1e-15);
        assert!(matches!(IntervalMap::parse("0,1/2->0,1"), Err(Error::NotMeasurePreserving(_))));
        assert!(matches!(IntervalMap::parse("0,1/2->0,1/2;1/2,1->0,1/2"), Err(Error::NotMeasurePreserving(_))));
        assert!(IntervalMap::parse("0,1->0").is_err());
    }

    #[test]
    fn counterexample_pair() {
        let w1 = halves();
        let w2 = StepGraphon::constant(rat(1, 2)).unwrap();
        let phi = IntervalMap::multiply_mod(2);
        let rep = pushforward_check(&w1, &w2, &phi, 4).unwrap();
        assert!(rep.max_discrepancy.is_zero());
        let v = rigidity_verdict(&rep, &w1, &w2, &phi, &RunConfig::default()).unwrap();
        assert_eq!(v.verdict, "unequal");
        assert_eq!((v.t_c4_w1.as_str(), v.t_c4_w2.as_str()), ("1/8", "1/16"));
    }

    #[test]
    fn identity_and_constant_maps() {
        let cfg = RunConfig::default();
        let w = halves();
        let id = IntervalMap::identity();
        let rep = pushforward_check(&w, &w, &id, 3).unwrap();
        let v = rigidity_verdict(&rep, &w, &w, &id, &cfg).unwrap();
        assert_eq!((v.verdict.as_str(), v.violations), ("pullback-equal", 0));
        let c = StepGraphon::constant(rat(1, 2)).unwrap();
        let phi = IntervalMap::multiply_mod(2);
        let rep = pushforward_check(&c, &c, &phi, 3).unwrap();
        assert_eq!(rigidity_verdict(&rep, &c, &c, &phi, &cfg).unwrap().verdict, "pullback-equal");
        let other = StepGraphon::constant(rat(1, 3)).unwrap();
        assert!(matches!(rigidity_verdict(&rep, &c, &other, &phi, &cfg), Err(Error::Precheck(_))));
    }

    #[test]
    fn perturbed_block_is_detected() {
        let w1 = halves();
        let w2 = step(&[(1, 2), (1, 2)], &[&[(0, 1), (1, 1)], &[(1, 1), (1, 10)]]);
        let rep = pushforward_check(&w1, &w2, &IntervalMap::identity(), 2).unwrap();
        // J = J' = [1/2, 1): 0.1 · 1/4
        assert_eq!(rep.max_discrepancy, rat(1, 40));
    }
}
