//! Small simple graphs: text format, canonical labelling, automorphism
//! counts and exhaustive enumeration.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub const MAX_VERTICES: usize = 12;
pub const MAX_ENUMERATION: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallGraph {
    n: usize,
    adj: Vec<u16>,
}

impl fmt::Debug for SmallGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmallGraph({self})")
    }
}

impl fmt::Display for SmallGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "{}:{}", self.n, edges.join(","))
    }
}

impl std::str::FromStr for SmallGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SmallGraph::parse(s)
    }
}

impl SmallGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::Size(format!("{n} vertices (at most {MAX_VERTICES})")));
        }
        let mut g = SmallGraph { n, adj: vec![0; n] };
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Index(format!("edge {a}-{b} in a graph on {n} vertices")));
            }
            if a == b {
                return Err(Error::Index(format!("loop at {a}")));
            }
            if g.has_edge(a, b) {
                return Err(Error::Index(format!("repeated edge {a}-{b}")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        SmallGraph::new(n, &[]).expect("valid size")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        SmallGraph::new(n, &e).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.add_edge(n - 1, 0);
        }
        g
    }

    /// `K_4` minus an edge.
    pub fn k4_minus() -> Self {
        SmallGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).expect("valid")
    }

    /// Parses `"n:a-b,c-d,..."`; errors carry the byte offset.
    pub fn parse(s: &str) -> Result<Self> {
        let colon = s.find(':').ok_or_else(|| Error::parse(s.len(), "expected ':' after vertex count"))?;
        let n: usize = s[..colon]
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, format!("bad vertex count {:?}", &s[..colon])))?;
        if n > MAX_VERTICES {
            return Err(Error::parse(0, format!("{n} vertices exceeds {MAX_VERTICES}")));
        }
        let mut edges = Vec::new();
        let body = &s[colon + 1..];
        if !body.trim().is_empty() {
            let mut pos = colon + 1;
            for tok in body.split(',') {
                let at = pos + (tok.len() - tok.trim_start().len());
                let t = tok.trim();
                let (a, b) = t
                    .split_once('-')
                    .ok_or_else(|| Error::parse(at, format!("expected 'a-b', found {t:?}")))?;
                let a: usize = a.trim().parse().map_err(|_| Error::parse(at, format!("bad vertex {a:?}")))?;
                let b: usize = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(at + t.find('-').unwrap_or(0) + 1, format!("bad vertex {b:?}")))?;
                if a >= n || b >= n || a == b {
                    return Err(Error::parse(at, format!("invalid edge {a}-{b} for {n} vertices")));
                }
                if edges.iter().any(|&(x, y)| (x, y) == (a.min(b), a.max(b))) {
                    return Err(Error::parse(at, format!("repeated edge {a}-{b}")));
                }
                edges.push((a.min(b), a.max(b)));
                pos += tok.len() + 1;
            }
        }
        SmallGraph::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn neighbours(&self, a: usize) -> u16 {
        self.adj[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.has_edge(a, b) {
                    e.push((a, b));
                }
            }
        }
        e
    }

    /// Vertex `i` of the result is vertex `order[i]` of `self`.
    pub fn relabel(&self, order: &[usize]) -> SmallGraph {
        let mut g = Self::empty(order.len());
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                if self.has_edge(order[i], order[j]) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn induced(&self, vertices: &[usize]) -> SmallGraph {
        self.relabel(vertices)
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = 0u16;
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen >> s & 1 == 1 {
                continue;
            }
            let mut comp = 1u16 << s;
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0u16;
                for v in bits(frontier) {
                    next |= self.adj[v];
                }
                frontier = next & !comp;
                comp |= next;
            }
            seen |= comp;
            out.push(bits(comp).collect());
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    /// Vertex order starting at 0 in which every vertex after the first of
    /// its component has an earlier neighbour.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n);
        for comp in self.components() {
            let mut placed = 1u16 << comp[0];
            order.push(comp[0]);
            let mut i = order.len() - 1;
            while i < order.len() {
                let v = order[i];
                for u in bits(self.adj[v] & !placed) {
                    placed |= 1 << u;
                    order.push(u);
                }
                i += 1;
            }
        }
        order
    }

    fn code(&self, order: &[usize]) -> u128 {
        let mut c = 0u128;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                c = c << 1 | self.has_edge(order[i], order[j]) as u128;
            }
        }
        c
    }

    /// Equitable colour refinement; colours are ranks and are invariant
    /// under isomorphism.
    fn refine(&self, colors: &[u32]) -> Vec<u32> {
        let mut cur = colors.to_vec();
        loop {
            let sigs: Vec<(u32, Vec<u32>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<u32> = bits(self.adj[v]).map(|u| cur[u]).collect();
                    nb.sort_unstable();
                    (cur[v], nb)
                })
                .collect();
            let mut uniq = sigs.clone();
            uniq.sort();
            uniq.dedup();
            let next: Vec<u32> = sigs
                .iter()
                .map(|s| uniq.binary_search(s).expect("present") as u32)
                .collect();
            let classes = |c: &[u32]| c.iter().collect::<HashSet<_>>().len();
            if classes(&next) == classes(&cur) {
                return next;
            }
            cur = next;
        }
    }

    fn twins(&self, a: usize, b: usize) -> bool {
        let mask = !((1u16 << a) | (1u16 << b));
        self.adj[a] & mask == self.adj[b] & mask
    }

    fn search(&self, colors: Vec<u32>, best: &mut Option<(u128, Vec<usize>)>) {
        let n = self.n;
        let mut count = vec![0usize; n];
        for &c in &colors {
            count[c as usize] += 1;
        }
        let target = (0..n as u32).find(|&c| count[c as usize] > 1);
        let Some(target) = target else {
            let mut order = vec![0; n];
            for v in 0..n {
                order[colors[v] as usize] = v;
            }
            let code = self.code(&order);
            if best.as_ref().is_none_or(|(b, _)| code > *b) {
                *best = Some((code, order));
            }
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut reps: Vec<usize> = Vec::new();
        for &v in &cell {
            if reps.iter().any(|&r| self.twins(r, v)) {
                continue;
            }
            reps.push(v);
            let mut ind: Vec<u32> = colors.iter().map(|&c| 2 * c + 1).collect();
            ind[v] = 2 * colors[v];
            let refined = self.refine(&ind);
            self.search(refined, best);
        }
    }

    /// Canonical labelling order: `canonical_form() == self.relabel(order)`.
    pub fn canonical_order(&self) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        let start: Vec<u32> = (0..self.n).map(|v| self.degree(v) as u32).collect();
        let colors = self.refine(&start);
        let mut best = None;
        self.search(colors, &mut best);
        best.expect("at least one leaf").1
    }

    /// Representative of the isomorphism class, identical for isomorphic inputs.
    pub fn canonical_form(&self) -> SmallGraph {
        self.relabel(&self.canonical_order())
    }

    pub fn is_isomorphic(&self, other: &SmallGraph) -> bool {
        self.n == other.n
            && self.edge_count() == other.edge_count()
            && self.canonical_form() == other.canonical_form()
    }

    /// `|Aut(G)|` by orbit–stabiliser over backtracking searches.
    pub fn automorphism_count(&self) -> u64 {
        let start: Vec<u32> = (0..self.n).map(|v| self.degree(v) as u32).collect();
        let colors = self.refine(&start);
        let mut fixed: Vec<usize> = Vec::new();
        let mut total = 1u64;
        for v in 0..self.n {
            let orbit = (0..self.n)
                .filter(|&w| colors[w] == colors[v] && !fixed.contains(&w))
                .filter(|&w| self.extends(&colors, &fixed, v, w))
                .count() as u64;
            total *= orbit;
            fixed.push(v);
        }
        total
    }

    /// Is there an automorphism fixing `fixed` pointwise and sending v to w?
    fn extends(&self, colors: &[u32], fixed: &[usize], v: usize, w: usize) -> bool {
        let n = self.n;
        let mut map = vec![usize::MAX; n];
        let mut used = 0u16;
        for &f in fixed {
            map[f] = f;
            used |= 1 << f;
        }
        map[v] = w;
        used |= 1 << w;
        let ok = |map: &[usize], a: usize| {
            (0..n).all(|b| map[b] == usize::MAX || self.has_edge(a, b) == self.has_edge(map[a], map[b]))
        };
        if !ok(&map, v) {
            return false;
        }
        let rest: Vec<usize> = (0..n).filter(|&u| map[u] == usize::MAX).collect();
        fn go(g: &SmallGraph, colors: &[u32], rest: &[usize], i: usize, map: &mut Vec<usize>, used: u16, ok: &dyn Fn(&[usize], usize) -> bool) -> bool {
            if i == rest.len() {
                return true;
            }
            let a = rest[i];
            for b in 0..g.n {
                if used >> b & 1 == 1 || colors[b] != colors[a] {
                    continue;
                }
                map[a] = b;
                if ok(map, a) && go(g, colors, rest, i + 1, map, used | 1 << b, ok) {
                    return true;
                }
                map[a] = usize::MAX;
            }
            false
        }
        go(self, colors, &rest, 0, &mut map, used, &ok)
    }
}

pub(crate) fn bits(mut m: u16) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

pub(crate) fn bits_u32(mut m: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// One canonical representative of every graph on exactly `n` vertices.
pub fn enumerate_all(n: usize) -> Result<Vec<SmallGraph>> {
    if n > MAX_ENUMERATION {
        return Err(Error::Size(format!("enumeration beyond {MAX_ENUMERATION} vertices")));
    }
    let mut level: Vec<SmallGraph> = vec![SmallGraph::empty(0)];
    for k in 1..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for nb in 0u32..(1 << (k - 1)) {
                let mut h = SmallGraph::empty(k);
                for a in 0..k - 1 {
                    h.adj[a] = g.adj[a];
                }
                for u in 0..k - 1 {
                    if nb >> u & 1 == 1 {
                        h.add_edge(u, k - 1);
                    }
                }
                let c = h.canonical_form();
                if seen.insert(c.clone()) {
                    next.push(c);
                }
            }
        }
        level = next;
    }
    level.sort_by_key(sort_key);
    Ok(level)
}

fn sort_key(g: &SmallGraph) -> (usize, usize, std::cmp::Reverse<u128>) {
    let order: Vec<usize> = (0..g.n).collect();
    (g.n, g.edge_count(), std::cmp::Reverse(g.code(&order)))
}

/// Connected graphs with 2..=n vertices, one per isomorphism class, ordered by
/// vertex count, then edge count.
pub fn enumerate_connected(n: usize) -> Result<Vec<SmallGraph>> {
    if n > MAX_ENUMERATION {
        return Err(Error::Size(format!("enumeration beyond {MAX_ENUMERATION} vertices")));
    }
    let mut out = Vec::new();
    for k in 2..=n {
        out.extend(enumerate_all(k)?.into_iter().filter(|g| g.is_connected()));
    }
    Ok(out)
}

pub fn canonical_form(g: &SmallGraph) -> SmallGraph {
    g.canonical_form()
}
