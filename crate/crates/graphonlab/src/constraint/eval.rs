//! Numerical evaluation of density expressions at root tuples and
//! satisfaction checks of constraints.
//!
//! Non-root vertices of every term draw from one Latin hypercube per tuple,
//! slot by slot, so terms that agree on a sample agree exactly. Linear terms
//! differing only in whether some non-root pair is an edge are merged first,
//! since their sum does not constrain that pair.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use super::expr::{Constraint, DecoratedGraph, Decoration, DensityExpression};
use super::partitioned::{PartTable, PartitionedGraphon};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mc::{self, Rng, Stat};
use crate::rational::Rational;

/// Rejected root draws before a feasible set is declared null.
pub const FEASIBILITY_LIMIT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub label: String,
    pub status: Status,
    pub reason: Option<String>,
    pub tuples: u64,
    pub samples: u64,
    pub max_deviation: f64,
    pub pooled_se: f64,
    pub tol: f64,
    pub exact: bool,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn vacuous(label: &str, reason: String) -> Self {
        ConstraintReport {
            label: label.to_string(),
            status: Status::Vacuous,
            reason: Some(reason),
            tuples: 0,
            samples: 0,
            max_deviation: 0.0,
            pooled_se: 0.0,
            tol: 0.0,
            exact: false,
        }
    }
}

/// Inverse CDF of the uniform measure on a union of parts.
#[derive(Clone, Debug)]
struct Sampler {
    lo: Vec<f64>,
    hi: Vec<f64>,
    ends: Vec<f64>,
    total: f64,
    /// Table index and probability of each part.
    parts: Vec<(usize, f64)>,
}

impl Sampler {
    fn new(table: &PartTable, dec: &Decoration) -> Result<Self> {
        let mut s = Sampler {
            lo: Vec::new(),
            hi: Vec::new(),
            ends: Vec::new(),
            total: 0.0,
            parts: Vec::new(),
        };
        let mut total = Rational::zero();
        for name in dec {
            let i = table.index_of(name.as_str())?;
            let iv = &table.parts()[i].interval;
            if iv.is_empty() {
                continue;
            }
            total += iv.len();
            s.lo.push(iv.lo_f());
            s.hi.push(iv.hi_f());
            s.ends.push(total.to_f64().unwrap_or(f64::NAN));
            s.parts.push((i, 0.0));
        }
        if total.is_zero() {
            return Err(Error::EmptyDecoration(
                dec.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(","),
            ));
        }
        s.total = total.to_f64().unwrap_or(f64::NAN);
        let t = s.total;
        let mut prev = 0.0;
        for (k, p) in s.parts.iter_mut().enumerate() {
            p.1 = (s.ends[k] - prev) / t;
            prev = s.ends[k];
        }
        Ok(s)
    }

    fn map(&self, u: f64) -> f64 {
        let t = u * self.total;
        let k = self.ends.partition_point(|&e| e <= t).min(self.ends.len() - 1);
        let start = if k == 0 { 0.0 } else { self.ends[k - 1] };
        let x = self.lo[k] + (t - start);
        if x >= self.hi[k] {
            f64::from_bits(self.hi[k].to_bits() - 1).max(self.lo[k])
        } else {
            x
        }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo.iter().zip(&self.hi).any(|(&a, &b)| a <= x && x < b)
    }
}

fn pair_bit(a: usize, b: usize) -> u128 {
    let (h, l) = if a > b { (a, b) } else { (b, a) };
    1u128 << (h * (h - 1) / 2 + l)
}

/// A term with some non-root pairs left free; `dec` indexes the plan's
/// decoration lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Pattern {
    n: usize,
    m: usize,
    dec: usize,
    edges: u128,
    free: u128,
}

/// Interns decoration lists, comparing shared lists by pointer first.
#[derive(Default)]
struct Decorations(Vec<Arc<Vec<Decoration>>>);

impl Decorations {
    fn id(&mut self, d: &Arc<Vec<Decoration>>) -> usize {
        if let Some(i) = self.0.iter().position(|e| Arc::ptr_eq(e, d)) {
            return i;
        }
        if let Some(i) = self.0.iter().position(|e| e == d) {
            return i;
        }
        self.0.push(d.clone());
        self.0.len() - 1
    }

    fn pattern(&mut self, g: &DecoratedGraph) -> Pattern {
        let m = g.roots();
        let edges = g
            .graph()
            .edges()
            .into_iter()
            .filter(|&(a, b)| a >= m || b >= m)
            .fold(0, |acc, (a, b)| acc | pair_bit(a, b));
        Pattern {
            n: g.n(),
            m,
            dec: self.id(g.shared_decorations()),
            edges,
            free: 0,
        }
    }
}

/// Replaces pairs of equal-weight terms that differ in one pair only by a
/// single term leaving that pair free, until no such pair remains.
fn merge_free(mut items: Vec<(Rational, Pattern)>) -> Vec<(Rational, Pattern)> {
    loop {
        let mut changed = false;
        for b in 0..128 {
            let bit = 1u128 << b;
            let mut seen: HashMap<(Pattern, &Rational), usize> = HashMap::new();
            let mut merged = vec![false; items.len()];
            let mut dropped = vec![false; items.len()];
            for (k, (c, p)) in items.iter().enumerate() {
                if p.free & bit != 0 || p.n < 2 || bit >> (p.n * (p.n - 1) / 2) != 0 {
                    continue;
                }
                let key = Pattern {
                    edges: p.edges & !bit,
                    ..*p
                };
                match seen.get(&(key, c)) {
                    Some(&o) if !merged[o] => {
                        merged[o] = true;
                        dropped[k] = true;
                    }
                    Some(_) => {}
                    None => {
                        seen.insert((key, c), k);
                    }
                }
            }
            if dropped.iter().any(|&d| d) {
                changed = true;
                let mut k = 0;
                items.retain(|_| {
                    k += 1;
                    !dropped[k - 1]
                });
                let mut k = 0;
                for it in items.iter_mut() {
                    while dropped[k] {
                        k += 1;
                    }
                    if merged[k] {
                        it.1.free |= bit;
                        it.1.edges &= !bit;
                    }
                    k += 1;
                }
            }
        }
        if !changed {
            return items;
        }
    }
}

#[derive(Clone, Debug)]
struct Item {
    m: usize,
    samplers: Vec<Sampler>,
    /// `(a, b, edge)` for every constrained pair with a non-root end.
    checks: Vec<(usize, usize, bool)>,
}

impl Item {
    fn new(p: &Pattern, dec: &[Decoration], table: &PartTable) -> Result<Self> {
        let samplers = dec[p.m..].iter().map(|d| Sampler::new(table, d)).collect::<Result<Vec<_>>>()?;
        let mut checks = Vec::new();
        for b in p.m..p.n {
            for a in 0..b {
                let bit = pair_bit(a, b);
                if p.free & bit == 0 {
                    checks.push((a, b, p.edges & bit != 0));
                }
            }
        }
        // Edges first: on sparse tiles they vanish sooner.
        checks.sort_by_key(|c| !c.2);
        Ok(Item { m: p.m, samplers, checks })
    }

    fn eval(&self, w: &PartitionedGraphon, pos: &mut [f64; 16], u: &[f64]) -> f64 {
        for (j, s) in self.samplers.iter().enumerate() {
            pos[self.m + j] = s.map(u[j]);
        }
        let mut p = 1.0;
        for &(a, b, edge) in &self.checks {
            let v = w.value(pos[a], pos[b]);
            p *= if edge { v } else { 1.0 - v };
            if p == 0.0 {
                break;
            }
        }
        p
    }

    /// Exact value on a step graphon aligned with the table.
    fn exact(&self, w: &crate::graphon::StepGraphon, blocks: &mut [usize; 16]) -> f64 {
        fn rec(it: &Item, w: &crate::graphon::StepGraphon, blocks: &mut [usize; 16], j: usize) -> f64 {
            if j == it.samplers.len() {
                let mut p = 1.0;
                for &(a, b, edge) in &it.checks {
                    let v = w.block_f(blocks[a], blocks[b]);
                    p *= if edge { v } else { 1.0 - v };
                }
                return p;
            }
            let mut s = 0.0;
            for &(part, prob) in &it.samplers[j].parts {
                blocks[it.m + j] = part;
                s += prob * rec(it, w, blocks, j + 1);
            }
            s
        }
        rec(self, w, blocks, 0)
    }
}

/// A constraint or expression compiled to `Σ coeff·Π items + constant`.
#[derive(Clone, Debug)]
struct Plan {
    m: usize,
    root_pairs: Vec<(usize, usize, bool)>,
    roots: Vec<Option<Sampler>>,
    items: Vec<Item>,
    monomials: Vec<(f64, Vec<usize>)>,
    constant: f64,
    dims: usize,
}

impl Plan {
    fn compile(left: &DensityExpression, right: Option<&DensityExpression>, table: &PartTable) -> Result<Self> {
        let mut signed: Vec<(Rational, &Vec<DecoratedGraph>)> =
            left.terms.iter().map(|t| (t.coeff.clone(), &t.factors)).collect();
        if let Some(r) = right {
            signed.extend(r.terms.iter().map(|t| (-t.coeff.clone(), &t.factors)));
        }
        let first = signed.iter().find_map(|(_, f)| f.first());
        let m = first.map_or(0, |g| g.roots());
        let mut root_pairs = Vec::new();
        let mut roots = Vec::new();
        if let Some(g) = first {
            for b in 0..m {
                for a in 0..b {
                    root_pairs.push((a, b, g.graph().has_edge(a, b)));
                }
            }
            for v in 0..m {
                roots.push(match Sampler::new(table, g.decoration(v)) {
                    Ok(s) => Some(s),
                    Err(Error::EmptyDecoration(_)) => None,
                    Err(e) => return Err(e),
                });
            }
        }

        let mut constant = Rational::zero();
        let mut decs = Decorations::default();
        let mut linear: Vec<(Rational, Pattern)> = Vec::new();
        let mut at: HashMap<Pattern, usize> = HashMap::new();
        let mut products: Vec<(Rational, Vec<Pattern>)> = Vec::new();
        for (c, factors) in signed {
            match factors.len() {
                0 => constant += c,
                1 => {
                    let p = decs.pattern(&factors[0]);
                    match at.get(&p) {
                        Some(&i) => linear[i].0 += c,
                        None => {
                            at.insert(p, linear.len());
                            linear.push((c, p));
                        }
                    }
                }
                _ => products.push((c, factors.iter().map(|g| decs.pattern(g)).collect())),
            }
        }
        linear.retain(|(c, _)| !c.is_zero());
        let linear = merge_free(linear);

        let mut index: HashMap<Pattern, usize> = HashMap::new();
        let mut items = Vec::new();
        let mut intern = |p: Pattern| -> Result<usize> {
            if let Some(&i) = index.get(&p) {
                return Ok(i);
            }
            items.push(Item::new(&p, &decs.0[p.dec], table)?);
            index.insert(p, items.len() - 1);
            Ok(items.len() - 1)
        };
        let mut monomials = Vec::new();
        for (c, p) in linear {
            monomials.push((c.to_f64().unwrap_or(f64::NAN), vec![intern(p)?]));
        }
        for (c, ps) in products {
            if c.is_zero() {
                continue;
            }
            let ids = ps.into_iter().map(&mut intern).collect::<Result<Vec<_>>>()?;
            monomials.push((c.to_f64().unwrap_or(f64::NAN), ids));
        }
        let dims = items.iter().map(|it| it.samplers.len()).max().unwrap_or(0);
        Ok(Plan {
            m,
            root_pairs,
            roots,
            items,
            monomials,
            constant: constant.to_f64().unwrap_or(f64::NAN),
            dims,
        })
    }

    fn linear(&self) -> bool {
        self.monomials.iter().all(|(_, ids)| ids.len() <= 1)
    }

    fn feasible(&self, w: &PartitionedGraphon, x: &[f64]) -> bool {
        self.root_pairs.iter().all(|&(a, b, edge)| {
            let v = w.value(x[a], x[b]);
            if edge {
                v > 0.0
            } else {
                v < 1.0
            }
        })
    }

    /// A root pair whose required adjacency has measure zero over the
    /// decorations, found from exact rectangle masses.
    fn null_root_pair(&self, w: &PartitionedGraphon) -> Option<(usize, usize, bool)> {
        let k = w.kernel();
        self.root_pairs.iter().copied().find(|&(a, b, edge)| {
            let (sa, sb) = match (&self.roots[a], &self.roots[b]) {
                (Some(sa), Some(sb)) => (sa, sb),
                _ => return false,
            };
            let mut mass = 0.0;
            for i in 0..sa.lo.len() {
                for j in 0..sb.lo.len() {
                    mass += k.rect_mass((sa.lo[i], sa.hi[i]), (sb.lo[j], sb.hi[j]));
                }
            }
            let area = sa.total * sb.total;
            if edge {
                mass <= 1e-12 * area
            } else {
                mass >= (1.0 - 1e-12) * area
            }
        })
    }

    fn sample_roots(&self, w: &PartitionedGraphon, rng: &mut Rng) -> Result<Vec<f64>> {
        let samplers: Vec<&Sampler> = self.roots.iter().map(|s| s.as_ref().expect("non-null roots")).collect();
        let mut x = vec![0.0; self.m];
        for _ in 0..FEASIBILITY_LIMIT {
            for (v, s) in samplers.iter().enumerate() {
                x[v] = s.map(rng.random());
            }
            if self.feasible(w, &x) {
                return Ok(x);
            }
        }
        Err(Error::FeasibilitySampling(FEASIBILITY_LIMIT))
    }

    fn combine(&self, v: &[f64]) -> f64 {
        self.constant + self.monomials.iter().map(|(c, ids)| c * ids.iter().map(|&i| v[i]).product::<f64>()).sum::<f64>()
    }

    fn exact_at(&self, w: &crate::graphon::StepGraphon, roots: &[f64]) -> f64 {
        let mut blocks = [0usize; 16];
        for (v, &x) in roots.iter().enumerate() {
            blocks[v] = w.part_of(x);
        }
        let vals: Vec<f64> = self.items.iter().map(|it| it.exact(w, &mut blocks)).collect();
        self.combine(&vals)
    }

    /// Monte Carlo value of the plan at fixed roots.
    fn estimate_at(&self, w: &PartitionedGraphon, roots: &[f64], samples: u64, rng: &mut Rng) -> Estimate {
        if let Some(step) = w.step() {
            return Estimate {
                value: self.exact_at(step, roots),
                std_error: 0.0,
            };
        }
        if self.dims == 0 {
            let vals = vec![1.0; self.items.len()];
            return Estimate {
                value: self.combine(&vals),
                std_error: 0.0,
            };
        }
        let n = samples.max(2) as usize;
        let perms: Vec<Vec<u32>> = (0..self.dims)
            .map(|_| {
                let mut p: Vec<u32> = (0..n as u32).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let q = self.items.len();
        let mut pos = [0.0f64; 16];
        pos[..roots.len()].copy_from_slice(roots);
        let mut u = vec![0.0; self.dims];
        let mut vals = vec![0.0; q];
        let linear = self.linear();
        let mut stat = Stat::default();
        let mut sums = vec![0.0; q];
        let mut cross = if linear { Vec::new() } else { vec![0.0; q * q] };
        for s in 0..n {
            for (j, p) in perms.iter().enumerate() {
                u[j] = (p[s] as f64 + rng.random::<f64>()) / n as f64;
            }
            for (i, it) in self.items.iter().enumerate() {
                vals[i] = it.eval(w, &mut pos, &u);
            }
            if linear {
                stat.push(self.combine(&vals));
            } else {
                for i in 0..q {
                    sums[i] += vals[i];
                    for k in 0..=i {
                        cross[i * q + k] += vals[i] * vals[k];
                    }
                }
            }
        }
        if linear {
            return Estimate {
                value: stat.mean,
                std_error: stat.std_error(),
            };
        }
        let nf = n as f64;
        let mean: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        let mut grad = vec![0.0; q];
        for (c, ids) in &self.monomials {
            for (p, &i) in ids.iter().enumerate() {
                let rest: f64 = ids.iter().enumerate().filter(|&(r, _)| r != p).map(|(_, &k)| mean[k]).product();
                grad[i] += c * rest;
            }
        }
        let mut var = 0.0;
        for i in 0..q {
            for k in 0..q {
                let (a, b) = if k <= i { (i, k) } else { (k, i) };
                let cov = (cross[a * q + b] - nf * mean[a] * mean[b]) / (nf - 1.0);
                var += grad[i] * grad[k] * cov;
            }
        }
        Estimate {
            value: self.combine(&mean),
            std_error: (var.max(0.0) / nf).sqrt(),
        }
    }
}

fn text_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Value of `expr` at the given root positions, non-roots drawn from their
/// decorations. Exact when the graphon is a step graphon with one part per
/// block.
pub fn evaluate_at_roots(
    expr: &DensityExpression,
    w: &PartitionedGraphon,
    roots: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let plan = Plan::compile(expr, None, w.table())?;
    if roots.len() != plan.m {
        return Err(Error::InfeasibleRoots(format!("{} roots given, {} expected", roots.len(), plan.m)));
    }
    for (v, s) in plan.roots.iter().enumerate() {
        let x = roots[v];
        match s {
            None => return Err(Error::EmptyDecoration(format!("root {v}"))),
            Some(s) if !s.contains(x) => {
                return Err(Error::InfeasibleRoots(format!("root {v} at {x} is outside its decoration")))
            }
            _ => {}
        }
    }
    if !plan.feasible(w, roots) {
        return Err(Error::InfeasibleRoots(format!("{roots:?} violates the root graph")));
    }
    let mut rng = mc::stream(seed, mc::stream_id(&[text_hash(&expr.to_string()), 1]));
    Ok(plan.estimate_at(w, roots, samples, &mut rng))
}

pub fn check_constraint(c: &Constraint, w: &PartitionedGraphon, cfg: &RunConfig) -> Result<ConstraintReport> {
    check_labelled("", c, w, cfg)
}

/// Samples `cfg.tuples` feasible root tuples, evaluates left minus right at
/// each with `cfg.ext_samples` extensions, and compares the largest deviation
/// with the tolerance. Constraints without roots are evaluated once with
/// `tuples × ext_samples` samples.
pub fn check_labelled(label: &str, c: &Constraint, w: &PartitionedGraphon, cfg: &RunConfig) -> Result<ConstraintReport> {
    let plan = Plan::compile(&c.left, Some(&c.right), w.table())?;
    if let Some(v) = plan.roots.iter().position(|s| s.is_none()) {
        return Ok(ConstraintReport::vacuous(label, format!("root {v} has a null decoration")));
    }
    if let Some((a, b, edge)) = plan.null_root_pair(w) {
        let rel = if edge { "adjacent" } else { "non-adjacent" };
        return Ok(ConstraintReport::vacuous(label, format!("roots {a} and {b} are almost never {rel}")));
    }
    let h = text_hash(&c.to_string());
    let (tuples, samples) = if plan.m == 0 {
        (1, cfg.tuples * cfg.ext_samples)
    } else {
        (cfg.tuples, cfg.ext_samples)
    };
    let results = mc::par_map(tuples as usize, cfg.workers, |t| -> Result<Estimate> {
        let mut rng = mc::stream(cfg.seed, mc::stream_id(&[h, t as u64, 0]));
        let roots = plan.sample_roots(w, &mut rng)?;
        let mut rng = mc::stream(cfg.seed, mc::stream_id(&[h, t as u64, 1]));
        Ok(plan.estimate_at(w, &roots, samples, &mut rng))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_deviation = results.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
    let pooled_se = (results.iter().map(|e| e.std_error * e.std_error).sum::<f64>() / results.len() as f64).sqrt();
    let tol = cfg
        .tol
        .unwrap_or_else(|| mc::critical_z(cfg.alpha, tuples) * pooled_se + cfg.abs_slack);
    Ok(ConstraintReport {
        label: label.to_string(),
        status: if max_deviation <= tol { Status::Pass } else { Status::Fail },
        reason: None,
        tuples,
        samples,
        max_deviation,
        pooled_se,
        tol,
        exact: w.step().is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{ConstantKernel, StepGraphon};
    use crate::rational::rat;
    use std::sync::Arc;

    fn bip() -> PartitionedGraphon {
        let w = StepGraphon::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        )
        .unwrap();
        PartitionedGraphon::from_step(w, None).unwrap()
    }

    fn expr(s: &str) -> DensityExpression {
        s.parse().unwrap()
    }

    #[test]
    fn isolated_vertex_is_one() {
        let w = PartitionedGraphon::new(
            Arc::new(ConstantKernel(0.3)),
            PartTable::of_step(&StepGraphon::constant(rat(3, 10)).unwrap()),
        );
        let e = evaluate_at_roots(&expr("graph{1; ; roots=0; dec=[{P1}]}"), &w, &[], 100, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn bipartite_examples() {
        let w = bip();
        let e = evaluate_at_roots(&expr("graph{2; 0-1; roots=1; dec=[{P1},{P2}]}"), &w, &[0.2], 100, 1).unwrap();
        assert_eq!(e.value, 1.0);
        let e = evaluate_at_roots(&expr("graph{2; 0-1; roots=1; dec=[{P1},{P1}]}"), &w, &[0.2], 100, 1).unwrap();
        assert_eq!(e.value, 0.0);
        // The same values through the sampling path.
        let mc = w.with_kernel(w.kernel().clone());
        let e = evaluate_at_roots(&expr("graph{2; 0-1; roots=1; dec=[{P1},{P2}]}"), &mc, &[0.2], 1000, 1).unwrap();
        assert_eq!(e.value, 1.0);
        let e = evaluate_at_roots(&expr("graph{2; 0-1; roots=1; dec=[{P1},{P1}]}"), &mc, &[0.2], 1000, 1).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn infeasible_and_empty() {
        let w = bip();
        let r = evaluate_at_roots(&expr("graph{2; 0-1; roots=2; dec=[{P1},{P1}]}"), &w, &[0.1, 0.2], 10, 1);
        assert!(matches!(r, Err(Error::InfeasibleRoots(_))));
        let r = evaluate_at_roots(&expr("graph{1; ; roots=1; dec=[{P1}]}"), &w, &[0.7], 10, 1);
        assert!(matches!(r, Err(Error::InfeasibleRoots(_))));
        let c = Constraint::parse("graph{2; 0-1; roots=2; dec=[{P1},{P1}]} = 0").unwrap();
        assert_eq!(check_constraint(&c, &w, &RunConfig::default()).unwrap().status, Status::Vacuous);
        // Every root pair is feasible inside the single part, the triangle is not.
        let one = PartitionedGraphon::new(w.kernel().clone(), PartTable::of_step(&StepGraphon::constant(rat(1, 2)).unwrap()));
        let c = Constraint::parse("graph{3; 0-1,1-2,0-2; roots=3; dec=[{P1},{P1},{P1}]} = 0").unwrap();
        let r = check_constraint(&c, &one, &RunConfig::default());
        assert!(matches!(r, Err(Error::FeasibilitySampling(_))), "{r:?}");
    }

    #[test]
    fn constant_edge_density() {
        let t = PartTable::of_step(&StepGraphon::constant(rat(3, 10)).unwrap());
        let w = PartitionedGraphon::new(Arc::new(ConstantKernel(0.3)), t);
        let c = Constraint::parse("graph{2; 0-1; roots=0; dec=[{P1},{P1}]} = 3/10").unwrap();
        let cfg = RunConfig {
            tuples: 4,
            ext_samples: 1000,
            ..RunConfig::default()
        };
        let r = check_constraint(&c, &w, &cfg).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn absent_pairs_merge_to_one_item() {
        let t = PartTable::of_step(&StepGraphon::constant(rat(1, 2)).unwrap());
        let e = expr(
            "graph{3; 0-1; roots=1; dec=[{P1},{P1},{P1}]} + graph{3; 0-1,1-2; roots=1; dec=[{P1},{P1},{P1}]} \
             + graph{3; 0-1,0-2; roots=1; dec=[{P1},{P1},{P1}]} + graph{3; 0-1,0-2,1-2; roots=1; dec=[{P1},{P1},{P1}]}",
        );
        let p = Plan::compile(&e, None, &t).unwrap();
        assert_eq!(p.items.len(), 1);
        assert_eq!(p.items[0].checks, vec![(0, 1, true)]);
    }

    #[test]
    fn identical_sides_cancel() {
        let w = PartitionedGraphon::new(
            Arc::new(crate::graphon::HalfGraphon),
            PartTable::of_step(&StepGraphon::constant(rat(1, 2)).unwrap()),
        );
        let c = Constraint::parse(
            "graph{3; 0-1,1-2; roots=1; dec=[{P1},{P1},{P1}]}*graph{2; ; roots=1; dec=[{P1},{P1}]} = \
             graph{3; 0-1,1-2; roots=1; dec=[{P1},{P1},{P1}]}*graph{2; ; roots=1; dec=[{P1},{P1}]}",
        )
        .unwrap();
        let cfg = RunConfig {
            tuples: 3,
            ext_samples: 500,
            ..RunConfig::default()
        };
        let r = check_constraint(&c, &w, &cfg).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn nonlinear_half_graphon() {
        // On the half graphon the neighbourhood of x has measure x, so
        // t(K2 at x)^2 = x^2 and the cherry-free check below holds.
        let w = PartitionedGraphon::new(
            Arc::new(crate::graphon::HalfGraphon),
            PartTable::of_step(&StepGraphon::constant(rat(1, 2)).unwrap()),
        );
        let e = expr("graph{2; 0-1; roots=1; dec=[{P1},{P1}]}*graph{2; 0-1; roots=1; dec=[{P1},{P1}]}");
        let est = evaluate_at_roots(&e, &w, &[0.6], 20000, 3).unwrap();
        assert!((est.value - 0.36).abs() < 4.0 * est.std_error + 1e-6, "{est:?}");
        assert!(est.std_error > 0.0);
    }
}
