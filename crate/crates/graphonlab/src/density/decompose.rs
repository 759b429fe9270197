//! Induced densities of disconnected graphs as polynomials in the densities
//! of connected graphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{SmallGraph, MAX_ENUMERATION};
use crate::rational::{self, Rational};

/// Polynomial with rational coefficients whose indeterminates are connected
/// graphs on at least two vertices (the one-vertex graph has density 1).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DensityPolynomial {
    terms: BTreeMap<Vec<SmallGraph>, Rational>,
}

impl DensityPolynomial {
    pub fn constant(c: Rational) -> Self {
        let mut p = Self::default();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn variable(g: SmallGraph) -> Self {
        let mut p = Self::default();
        p.terms.insert(vec![g], Rational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[SmallGraph], &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn indeterminates(&self) -> Vec<SmallGraph> {
        let mut v: Vec<SmallGraph> = self.terms.keys().flatten().cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    fn add_term(&mut self, mono: Vec<SmallGraph>, c: Rational) {
        let e = self.terms.entry(mono).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut r = Self::default();
        for (m, v) in &self.terms {
            r.add_term(m.clone(), v * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m: Vec<SmallGraph> = m1.iter().chain(m2).cloned().collect();
                m.sort();
                r.add_term(m, c1 * c2);
            }
        }
        r
    }

    /// Evaluates with `density(G)` for every indeterminate.
    pub fn eval<S>(&self, mut density: impl FnMut(&SmallGraph) -> S) -> S
    where
        S: Clone + std::ops::Add<Output = S> + std::ops::Mul<Output = S> + From<Rational> + Zero,
    {
        let mut cache: HashMap<SmallGraph, S> = HashMap::new();
        let mut total = S::zero();
        for (mono, c) in &self.terms {
            let mut t = S::from(c.clone());
            for g in mono {
                let v = cache.entry(g.clone()).or_insert_with(|| density(g)).clone();
                t = t * v;
            }
            total = total + t;
        }
        total
    }

    pub fn eval_f64(&self, mut density: impl FnMut(&SmallGraph) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(mono, c)| mono.iter().fold(rational::to_f64(c), |acc, g| acc * density(g)))
            .sum()
    }
}

impl fmt::Display for DensityPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = rational::format(c);
                for g in m {
                    s.push_str(&format!("*d({g})"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `d(H, ·)` as a polynomial over connected graphs on at most `|H|` vertices.
pub fn densall_decompose(h: &SmallGraph) -> Result<DensityPolynomial> {
    if h.n() > MAX_ENUMERATION {
        return Err(Error::Size(format!("decomposition beyond {MAX_ENUMERATION} vertices")));
    }
    let mut memo = HashMap::new();
    Ok(decompose(&h.canonical_form(), &mut memo))
}

fn decompose(h: &SmallGraph, memo: &mut HashMap<SmallGraph, DensityPolynomial>) -> DensityPolynomial {
    if let Some(p) = memo.get(h) {
        return p.clone();
    }
    let comps = h.components();
    let result = if h.n() <= 1 {
        DensityPolynomial::constant(Rational::one())
    } else if comps.len() == 1 {
        DensityPolynomial::variable(h.clone())
    } else {
        split(h, &comps, memo)
    };
    memo.insert(h.clone(), result.clone());
    result
}

/// With `H = H' ∪ H''` and `|H'| = n'`:
/// `d(H')·d(H'') = Σ_G #{A : G[A] ≅ H', G[V∖A] ≅ H''} / C(n, n') · d(G)`,
/// where `G` ranges over `H` plus cross edges; all `G ≠ H` have fewer
/// components.
fn split(h: &SmallGraph, comps: &[Vec<usize>], memo: &mut HashMap<SmallGraph, DensityPolynomial>) -> DensityPolynomial {
    let n = h.n();
    let first = &comps[0];
    let rest: Vec<usize> = (0..n).filter(|v| !first.contains(v)).collect();
    let h1 = h.induced(first).canonical_form();
    let h2 = h.induced(&rest).canonical_form();
    let n1 = first.len();

    let cross: Vec<(usize, usize)> = first.iter().flat_map(|&a| rest.iter().map(move |&b| (a, b))).collect();
    let mut classes: Vec<SmallGraph> = Vec::new();
    for mask in 0u32..(1 << cross.len()) {
        let mut g = h.clone();
        for (i, &(a, b)) in cross.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.add_edge(a, b);
            }
        }
        let c = g.canonical_form();
        if !classes.contains(&c) {
            classes.push(c);
        }
    }

    let binom = binomial(n, n1);
    let mut self_coeff = Rational::zero();
    let mut others = DensityPolynomial::default();
    for g in &classes {
        let count = splits(g, n1, &h1, &h2);
        if count == 0 {
            continue;
        }
        let c = Rational::new(count.into(), binom.into());
        if g == h {
            self_coeff = c;
        } else {
            let pg = decompose(g, memo);
            others = others.add(&pg.scale(&c));
        }
    }
    let prod = decompose(&h1, memo).mul(&decompose(&h2, memo));
    prod.add(&others.scale(&-Rational::one())).scale(&(Rational::one() / self_coeff))
}

fn splits(g: &SmallGraph, n1: usize, h1: &SmallGraph, h2: &SmallGraph) -> u64 {
    let n = g.n();
    let mut count = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let a: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 0).collect();
        if g.induced(&a).canonical_form() == *h1 && g.induced(&b).canonical_form() == *h2 {
            count += 1;
        }
    }
    count
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k as u64).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::induced_rational;
    use crate::graphon::StepGraphon;
    use crate::rational::rat;

    #[test]
    fn connected_is_identity() {
        let p = densall_decompose(&SmallGraph::path(4)).unwrap();
        assert_eq!(p, DensityPolynomial::variable(SmallGraph::path(4).canonical_form()));
    }

    #[test]
    fn two_isolated_vertices() {
        // 1 = d(2K1) + d(K2)
        let p = densall_decompose(&SmallGraph::empty(2)).unwrap();
        let k2 = SmallGraph::complete(2).canonical_form();
        let expect = DensityPolynomial::constant(rat(1, 1)).add(&DensityPolynomial::variable(k2).scale(&rat(-1, 1)));
        assert_eq!(p, expect);
    }

    #[test]
    fn matches_exact_on_step_graphon() {
        let w = StepGraphon::new(
            vec![rat(1, 5), rat(1, 3), rat(7, 15)],
            vec![
                vec![rat(1, 2), rat(1, 3), rat(0, 1)],
                vec![rat(1, 3), rat(1, 1), rat(2, 5)],
                vec![rat(0, 1), rat(2, 5), rat(1, 7)],
            ],
        )
        .unwrap();
        for s in ["4:0-1,2-3", "3:0-1", "5:0-1,2-3", "4:0-1,1-2"] {
            let h = SmallGraph::parse(s).unwrap();
            let p = densall_decompose(&h).unwrap();
            assert!(p.indeterminates().iter().all(|g| g.is_connected() && g.n() >= 2));
            let v: Rational = p.eval(|g| induced_rational(g, &w));
            assert_eq!(v, induced_rational(&h, &w), "{s}");
        }
    }
}
