//! Decorated graphs, density expressions and constraints, with the text form
//! `c*graph{n; a-b,...; roots=m; dec=[{A},{B1,B2},...]} + ... = ...`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::SmallGraph;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartName(pub String);

impl PartName {
    pub fn new(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::parse(0, format!("bad part name {s:?}")));
        }
        Ok(PartName(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PartName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Decoration = Vec<PartName>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecoratedGraph {
    graph: SmallGraph,
    roots: usize,
    dec: Arc<Vec<Decoration>>,
}

impl DecoratedGraph {
    pub fn new(graph: SmallGraph, roots: usize, dec: Vec<Decoration>) -> Result<Self> {
        DecoratedGraph::shared(graph, roots, Arc::new(dec))
    }

    /// As `new`, reusing a decoration list shared between terms.
    pub fn shared(graph: SmallGraph, roots: usize, dec: Arc<Vec<Decoration>>) -> Result<Self> {
        if roots > graph.n() {
            return Err(Error::Index(format!("{roots} roots on {} vertices", graph.n())));
        }
        if dec.len() != graph.n() {
            return Err(Error::Index(format!("{} decorations for {} vertices", dec.len(), graph.n())));
        }
        for (v, d) in dec.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::Index(format!("vertex {v} has an empty decoration")));
            }
            if d.iter().collect::<BTreeSet<_>>().len() != d.len() {
                return Err(Error::Index(format!("vertex {v} repeats a part")));
            }
        }
        Ok(DecoratedGraph { graph, roots, dec })
    }

    /// Shorthand used by the suite builders.
    pub fn build(n: usize, roots: usize, edges: &[(usize, usize)], dec: &[&[&str]]) -> Result<Self> {
        let dec = dec
            .iter()
            .map(|d| d.iter().map(|s| PartName::new(*s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        DecoratedGraph::new(SmallGraph::new(n, edges)?, roots, dec)
    }

    pub fn graph(&self) -> &SmallGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn roots(&self) -> usize {
        self.roots
    }

    pub fn decorations(&self) -> &[Decoration] {
        &self.dec
    }

    pub fn decoration(&self, v: usize) -> &Decoration {
        &self.dec[v]
    }

    pub(crate) fn shared_decorations(&self) -> &Arc<Vec<Decoration>> {
        &self.dec
    }

    pub fn with_decoration(&self, v: usize, d: Decoration) -> Self {
        let mut out = self.clone();
        Arc::make_mut(&mut out.dec)[v] = d;
        out
    }

    /// Same graph with the non-root vertices permuted: vertex `m + i` moves
    /// to `m + perm[i]`.
    pub fn relabel_non_roots(&self, perm: &[usize]) -> Result<Self> {
        let m = self.roots;
        let n = self.n();
        if perm.len() != n - m || perm.iter().collect::<BTreeSet<_>>().len() != perm.len() || perm.iter().any(|&p| p >= n - m) {
            return Err(Error::Index(format!("{perm:?} is not a permutation of {} non-roots", n - m)));
        }
        let to = |v: usize| if v < m { v } else { m + perm[v - m] };
        let edges: Vec<_> = self.graph.edges().into_iter().map(|(a, b)| (to(a), to(b))).collect();
        let mut dec = (*self.dec).clone();
        for v in m..n {
            dec[to(v)] = self.dec[v].clone();
        }
        DecoratedGraph::new(SmallGraph::new(n, &edges)?, m, dec)
    }

    fn root_signature(&self) -> (usize, Vec<(usize, usize)>, Vec<BTreeSet<&PartName>>) {
        let m = self.roots;
        let edges = self.graph.edges().into_iter().filter(|&(a, b)| a < m && b < m).collect();
        let decs = self.dec[..m].iter().map(|d| d.iter().collect()).collect();
        (m, edges, decs)
    }

    pub fn compatible(&self, other: &DecoratedGraph) -> bool {
        self.root_signature() == other.root_signature()
    }
}

impl fmt::Display for DecoratedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.graph.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let decs: Vec<String> = self
            .dec
            .iter()
            .map(|d| format!("{{{}}}", d.iter().map(|p| p.0.as_str()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(
            f,
            "graph{{{}; {}; roots={}; dec=[{}]}}",
            self.n(),
            edges.join(","),
            self.roots,
            decs.join(",")
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Vec<DecoratedGraph>,
}

impl Monomial {
    pub fn term(coeff: Rational, g: DecoratedGraph) -> Self {
        Monomial { coeff, factors: vec![g] }
    }

    pub fn constant(coeff: Rational) -> Self {
        Monomial { coeff, factors: Vec::new() }
    }
}

/// Formal polynomial in decorated graphs. Monomials are kept in the order
/// they were written and are never merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DensityExpression {
    pub terms: Vec<Monomial>,
}

impl DensityExpression {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let e = DensityExpression { terms };
        check_compatible(e.graphs())?;
        Ok(e)
    }

    pub fn single(g: DecoratedGraph) -> Self {
        DensityExpression {
            terms: vec![Monomial::term(Rational::one(), g)],
        }
    }

    /// `Σ coeff·g` over the given graphs.
    pub fn sum(coeff: Rational, gs: Vec<DecoratedGraph>) -> Self {
        DensityExpression {
            terms: gs.into_iter().map(|g| Monomial::term(coeff.clone(), g)).collect(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        DensityExpression {
            terms: vec![Monomial::constant(c)],
        }
    }

    pub fn graphs(&self) -> impl Iterator<Item = &DecoratedGraph> {
        self.terms.iter().flat_map(|t| t.factors.iter())
    }

    pub fn plus(mut self, other: DensityExpression) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, c: &Rational) -> Self {
        for t in &mut self.terms {
            t.coeff = &t.coeff * c;
        }
        self
    }

    /// Product of two expressions, distributing monomials.
    pub fn times(&self, other: &DensityExpression) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(Monomial {
                    coeff: &a.coeff * &b.coeff,
                    factors,
                });
            }
        }
        DensityExpression { terms }
    }
}

fn check_compatible<'a>(mut gs: impl Iterator<Item = &'a DecoratedGraph>) -> Result<()> {
    if let Some(first) = gs.next() {
        for g in gs {
            if !first.compatible(g) {
                return Err(Error::Incompatible(format!("{first} and {g}")));
            }
        }
    }
    Ok(())
}

fn fmt_expr(e: &DensityExpression, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if e.terms.is_empty() {
        return f.write_str("0");
    }
    for (i, t) in e.terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        let c = t.coeff.abs();
        match (i, neg) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let mut parts: Vec<String> = Vec::new();
        if !c.is_one() || t.factors.is_empty() {
            parts.push(rational::format(&c));
        }
        parts.extend(t.factors.iter().map(|g| g.to_string()));
        f.write_str(&parts.join("*"))?;
    }
    Ok(())
}

impl fmt::Display for DensityExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub left: DensityExpression,
    pub right: DensityExpression,
}

impl Constraint {
    pub fn new(left: DensityExpression, right: DensityExpression) -> Result<Self> {
        check_compatible(left.graphs().chain(right.graphs()))?;
        Ok(Constraint { left, right })
    }

    /// `left = 0`.
    pub fn zero(left: DensityExpression) -> Result<Self> {
        Constraint::new(left, DensityExpression::constant(Rational::zero()))
    }

    pub fn graphs(&self) -> impl Iterator<Item = &DecoratedGraph> {
        self.left.graphs().chain(self.right.graphs())
    }

    /// The common root count, or 0 for a constraint without graphs.
    pub fn roots(&self) -> usize {
        self.graphs().next().map_or(0, |g| g.roots())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut p = Parser { s, pos: 0 };
        let left = p.expr()?;
        p.ws();
        p.expect('=')?;
        let right = p.expr()?;
        p.ws();
        if p.pos != s.len() {
            return Err(Error::parse(p.pos, "trailing input"));
        }
        Constraint::new(left, right)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(&self.left, f)?;
        f.write_str(" = ")?;
        fmt_expr(&self.right, f)
    }
}

impl FromStr for Constraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Constraint::parse(s)
    }
}

impl FromStr for DensityExpression {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { s, pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != s.len() {
            return Err(Error::parse(p.pos, "trailing input"));
        }
        check_compatible(e.graphs())?;
        Ok(e)
    }
}

impl FromStr for DecoratedGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { s, pos: 0 };
        let g = p.graph()?;
        p.ws();
        if p.pos != s.len() {
            return Err(Error::parse(p.pos, "trailing input"));
        }
        Ok(g)
    }
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.rest().chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{c}'")))
        }
    }

    fn eat(&mut self, word: &str) -> bool {
        self.ws();
        if self.rest().starts_with(word) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        self.ws();
        let start = self.pos;
        let len = self.rest().find(|c: char| !f(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.s[start..start + len]
    }

    fn usize(&mut self) -> Result<usize> {
        let at = self.pos;
        let t = self.take_while(|c| c.is_ascii_digit());
        t.parse().map_err(|_| Error::parse(at, "expected an integer"))
    }

    fn expr(&mut self) -> Result<DensityExpression> {
        let mut terms = Vec::new();
        let mut sign = Rational::one();
        if self.peek() == Some('-') {
            self.pos += 1;
            sign = -sign;
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        loop {
            let mut m = self.monomial()?;
            m.coeff *= &sign;
            terms.push(m);
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = Rational::one();
                }
                Some('-') => {
                    self.pos += 1;
                    sign = -Rational::one();
                }
                _ => break,
            }
        }
        Ok(DensityExpression { terms })
    }

    fn monomial(&mut self) -> Result<Monomial> {
        let mut coeff = Rational::one();
        let mut factors = Vec::new();
        loop {
            self.ws();
            if self.rest().starts_with("graph") {
                factors.push(self.graph()?);
            } else {
                let at = self.pos;
                let t = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '/' | 'e' | 'E'));
                if t.is_empty() {
                    return Err(Error::parse(at, "expected a number or graph{...}"));
                }
                let q = rational::parse(t).map_err(|_| Error::parse(at, format!("bad number {t:?}")))?;
                coeff *= q;
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(Monomial { coeff, factors })
    }

    fn graph(&mut self) -> Result<DecoratedGraph> {
        let start = self.pos;
        if !self.eat("graph") {
            return Err(Error::parse(self.pos, "expected 'graph'"));
        }
        self.expect('{')?;
        let n = self.usize()?;
        if n > crate::graph::MAX_VERTICES {
            return Err(Error::parse(start, format!("{n} vertices exceeds {}", crate::graph::MAX_VERTICES)));
        }
        self.expect(';')?;
        let mut edges = Vec::new();
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let at = self.pos;
            let a = self.usize()?;
            self.expect('-')?;
            let b = self.usize()?;
            if a >= n || b >= n || a == b || edges.contains(&(a.min(b), a.max(b))) {
                return Err(Error::parse(at, format!("invalid edge {a}-{b}")));
            }
            edges.push((a.min(b), a.max(b)));
            if self.peek() == Some(',') {
                self.pos += 1;
            }
        }
        self.expect(';')?;
        if !self.eat("roots") {
            return Err(Error::parse(self.pos, "expected 'roots='"));
        }
        self.expect('=')?;
        let at = self.pos;
        let roots = self.usize()?;
        if roots > n {
            return Err(Error::parse(at, format!("{roots} roots on {n} vertices")));
        }
        self.expect(';')?;
        if !self.eat("dec") {
            return Err(Error::parse(self.pos, "expected 'dec='"));
        }
        self.expect('=')?;
        self.expect('[')?;
        let mut dec = Vec::new();
        while self.peek() == Some('{') {
            let at = self.pos;
            self.pos += 1;
            let mut d = Vec::new();
            loop {
                let name_at = self.pos;
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string();
                if name.is_empty() {
                    return Err(Error::parse(name_at, "expected a part name"));
                }
                let name = PartName(name);
                if d.contains(&name) {
                    return Err(Error::parse(name_at, format!("repeated part {name}")));
                }
                d.push(name);
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.expect('}')?;
            if d.is_empty() {
                return Err(Error::parse(at, "empty decoration"));
            }
            dec.push(d);
            if self.peek() == Some(',') {
                self.pos += 1;
            }
        }
        self.expect(']')?;
        self.expect('}')?;
        if dec.len() != n {
            return Err(Error::parse(start, format!("{} decorations for {n} vertices", dec.len())));
        }
        let graph = SmallGraph::new(n, &edges).map_err(|e| Error::parse(start, e.to_string()))?;
        DecoratedGraph::new(graph, roots, dec).map_err(|e| Error::parse(start, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn g(s: &str) -> DecoratedGraph {
        s.parse().unwrap()
    }

    #[test]
    fn round_trip() {
        let texts = [
            "graph{2; 0-1; roots=1; dec=[{A},{B1,B2}]} = 1/2",
            "2/3*graph{3; 0-1,1-2; roots=1; dec=[{A},{B},{C}]}*graph{1; ; roots=1; dec=[{A}]} - graph{2; ; roots=1; dec=[{A},{C}]} = 0",
            "-1/4 + graph{2; 0-1; roots=0; dec=[{E1},{E_inf}]} = graph{2; ; roots=0; dec=[{X},{Y}]}",
            "0 = 0",
        ];
        for t in texts {
            let c: Constraint = t.parse().unwrap();
            assert_eq!(c.to_string(), t);
            assert_eq!(c.to_string().parse::<Constraint>().unwrap(), c);
        }
    }

    #[test]
    fn loose_input_normalises() {
        let c: Constraint = " 0.5 * graph{ 2 ;0-1; roots = 1 ; dec = [ {A} , {B} ] } = 2*3".parse().unwrap();
        assert_eq!(c.to_string(), "1/2*graph{2; 0-1; roots=1; dec=[{A},{B}]} = 6");
        assert_eq!(c.left.terms[0].coeff, rat(1, 2));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = Constraint::parse("graph{2; 0-1; roots=1; dec=[{A}]} = 0").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 0, .. }));
        let e = Constraint::parse("graph{2; 0-1; roots=1; dec=[{A},{B}]} = ?").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 40, .. }), "{e:?}");
        let e = Constraint::parse("graph{2; 0-5; roots=1; dec=[{A},{B}]} = 0").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 9, .. }), "{e:?}");
        assert!(Constraint::parse("graph{2; ; roots=1; dec=[{A},{}]} = 0").is_err());
    }

    #[test]
    fn incompatible_roots_are_rejected() {
        // Different root decorations.
        let e = Constraint::parse("graph{1; ; roots=1; dec=[{A}]} = graph{1; ; roots=1; dec=[{B}]}");
        assert!(matches!(e, Err(Error::Incompatible(_))));
        // Different root edges.
        let e = Constraint::parse("graph{2; 0-1; roots=2; dec=[{A},{A}]} = graph{2; ; roots=2; dec=[{A},{A}]}");
        assert!(matches!(e, Err(Error::Incompatible(_))));
        // Root decorations compare as sets.
        Constraint::parse("graph{1; ; roots=1; dec=[{A,B}]} = graph{2; 0-1; roots=1; dec=[{B,A},{C}]}").unwrap();
    }

    #[test]
    fn relabel_moves_decorations() {
        let t = g("graph{3; 0-1; roots=1; dec=[{A},{B},{C}]}");
        let r = t.relabel_non_roots(&[1, 0]).unwrap();
        assert_eq!(r.to_string(), "graph{3; 0-2; roots=1; dec=[{A},{C},{B}]}");
    }
}
