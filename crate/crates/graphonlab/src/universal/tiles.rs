//! Kernels that only occur inside `W_0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphon::{
    checker_level, overlap, Descriptor, GraphonKernel, HalfGraphon, Interval, Kernel, NamedPart, StepGraphon,
    TileSpec, TiledGraphon,
};
use crate::rational::rat;

/// How a referencing tile reads the dyadic interval out of the column
/// coordinate: `C` takes the order `s-1` prefix of the offset inside `I_s`,
/// `D` the next `s-1` binary digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefKind {
    C,
    D,
}

/// `value(u, v) = 1` iff, with `v ∈ I_s`, `u` lies in the dyadic interval of
/// order `s-1` that `v` points to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefTile {
    pub kind: RefKind,
    pub depth: u32,
    /// `∫ value(u, v) dv` over the whole column, the same for every `u`.
    full: f64,
}

impl RefTile {
    pub fn new(kind: RefKind, depth: u32) -> Self {
        let full = (1..=depth).map(|s| (-(2.0 * s as f64 - 1.0)).exp2()).sum();
        RefTile { kind, depth, full }
    }

    /// `(s, n = 2^{s-1}, index of the target interval)` for a column
    /// coordinate, or `None` in the tail.
    fn target(&self, v: f64) -> Option<(f64, f64)> {
        let lv = checker_level(v, self.depth);
        if lv.tail {
            return None;
        }
        let n = ((lv.k - 1) as f64).exp2();
        let w = ((v - lv.lo) / lv.len).clamp(0.0, 1.0 - f64::EPSILON);
        let t = match self.kind {
            RefKind::C => (w * n).floor(),
            RefKind::D => ((w * n).fract() * n).floor(),
        };
        Some((n, t))
    }

    fn level_mass(&self, tu: f64, n: f64, a: f64, b: f64) -> f64 {
        // Measure of the w in [a, b) pointing at interval tu.
        match self.kind {
            RefKind::C => overlap(tu / n, (tu + 1.0) / n, a, b),
            RefKind::D => {
                let g = |x: f64| {
                    let y = x * n;
                    (y.floor() / n + (y.fract() - tu / n).clamp(0.0, 1.0 / n)) / n
                };
                (g(b) - g(a)).max(0.0)
            }
        }
    }
}

impl Kernel for RefTile {
    fn value(&self, u: f64, v: f64) -> f64 {
        match self.target(v) {
            Some((n, t)) if (u * n).floor() == t => 1.0,
            _ => 0.0,
        }
    }

    fn row_mass(&self, u: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if lo <= 1e-15 && hi >= 1.0 - 1e-15 {
            return self.full;
        }
        let mut s = 0.0;
        for k in 1..=self.depth {
            let len = (-(k as f64)).exp2();
            let start = 1.0 - 2.0 * len;
            let (a, b) = (lo.max(start), hi.min(start + len));
            if b <= a {
                continue;
            }
            let n = ((k - 1) as f64).exp2();
            let tu = (u * n).floor().min(n - 1.0);
            s += len * self.level_mass(tu, n, (a - start) / len, (b - start) / len);
        }
        s
    }

    fn col_mass(&self, v: f64, lo: f64, hi: f64) -> f64 {
        match self.target(v) {
            Some((n, t)) => overlap(t / n, (t + 1.0) / n, lo, hi),
            None => 0.0,
        }
    }
}

/// Sorted live parts for lookup by coordinate.
#[derive(Clone, Debug)]
struct Lookup {
    starts: Vec<f64>,
    ends: Vec<f64>,
}

impl Lookup {
    fn new(bounds: &[(f64, f64)]) -> Self {
        Lookup {
            starts: bounds.iter().map(|b| b.0).collect(),
            ends: bounds.iter().map(|b| b.1).collect(),
        }
    }

    fn find(&self, x: f64) -> usize {
        self.starts.partition_point(|&s| s <= x).saturating_sub(1)
    }
}

/// Per-part integrals of the balancing function.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceStats {
    pub integral: f64,
    pub square_integral: f64,
    pub min: f64,
    pub max: f64,
}

/// Column `G_1`: at a row `x` in part `X` the value is
/// `(2/ε)(pdeg(X) - h(x))`, `h` being the degree of `x` into everything
/// outside `G`. Rows are global coordinates.
#[derive(Clone, Debug)]
pub struct BalanceColumn {
    core: Arc<TiledGraphon>,
    lookup: Lookup,
    pdeg: Vec<f64>,
    stats: Vec<BalanceStats>,
    scale: f64,
    span: f64,
}

pub const QUADRATURE_POINTS: usize = 4096;
const PARTIAL_POINTS: usize = 256;

impl BalanceColumn {
    /// `parts` are the live parts outside `G` as `(lo, hi, pdeg)`, covering
    /// `[0, span)`.
    pub fn new(core: Arc<TiledGraphon>, parts: &[(f64, f64, f64)], epsilon: f64) -> Self {
        let bounds: Vec<(f64, f64)> = parts.iter().map(|p| (p.0, p.1)).collect();
        let span = parts.last().map_or(0.0, |p| p.1);
        let mut col = BalanceColumn {
            core,
            lookup: Lookup::new(&bounds),
            pdeg: parts.iter().map(|p| p.2).collect(),
            stats: Vec::new(),
            scale: 2.0 / epsilon,
            span,
        };
        col.stats = (0..parts.len())
            .map(|i| {
                let (a, b) = bounds[i];
                let h = (b - a) / QUADRATURE_POINTS as f64;
                let mut st = BalanceStats {
                    integral: 0.0,
                    square_integral: 0.0,
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                };
                for j in 0..QUADRATURE_POINTS {
                    let f = col.raw_in(i, a + (j as f64 + 0.5) * h);
                    st.integral += f * h;
                    st.square_integral += f * f * h;
                    st.min = st.min.min(f);
                    st.max = st.max.max(f);
                }
                st
            })
            .collect();
        col
    }

    fn raw_in(&self, part: usize, x: f64) -> f64 {
        self.scale * (self.pdeg[part] - self.core.row_mass(x, 0.0, self.span))
    }

    /// The unclamped balancing value at `x`.
    pub fn raw(&self, x: f64) -> f64 {
        self.raw_in(self.lookup.find(x), x)
    }

    pub fn stats(&self) -> &[BalanceStats] {
        &self.stats
    }

    /// `∫_lo^hi f`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut s = 0.0;
        for i in self.lookup.find(lo.max(0.0))..self.stats.len() {
            let (a, b) = (self.lookup.starts[i], self.lookup.ends[i]);
            if a >= hi {
                break;
            }
            if lo <= a && b <= hi {
                s += self.stats[i].integral;
                continue;
            }
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a {
                let h = (b - a) / PARTIAL_POINTS as f64;
                s += (0..PARTIAL_POINTS)
                    .map(|j| self.value(a + (j as f64 + 0.5) * h, 0.0))
                    .sum::<f64>()
                    * h;
            }
        }
        s
    }
}

impl Kernel for BalanceColumn {
    fn value(&self, x: f64, _: f64) -> f64 {
        self.raw(x).clamp(0.0, 1.0)
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.value(x, 0.0) * (hi - lo).max(0.0)
    }
    fn col_mass(&self, _: f64, lo: f64, hi: f64) -> f64 {
        self.integral(lo, hi)
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.integral(x.0, x.1) * (y.1 - y.0).max(0.0)
    }
}

/// A kernel constant on each row part and across columns. Rows are global
/// coordinates.
#[derive(Clone, Debug)]
pub struct PartColumn {
    lookup: Lookup,
    values: Vec<f64>,
}

impl PartColumn {
    /// `parts` are the live parts as `(lo, hi, value)`.
    pub fn new(parts: &[(f64, f64, f64)]) -> Self {
        let bounds: Vec<(f64, f64)> = parts.iter().map(|p| (p.0, p.1)).collect();
        PartColumn {
            lookup: Lookup::new(&bounds),
            values: parts.iter().map(|p| p.2).collect(),
        }
    }
}

impl Kernel for PartColumn {
    fn value(&self, x: f64, _: f64) -> f64 {
        self.values[self.lookup.find(x)]
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.value(x, 0.0) * (hi - lo).max(0.0)
    }
    fn col_mass(&self, _: f64, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * overlap(self.lookup.starts[i], self.lookup.ends[i], lo, hi))
            .sum()
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.col_mass(0.0, x.0, x.1) * (y.1 - y.0).max(0.0)
    }
}

/// Names of the stand-in CKM parts, in order.
pub const CKM_PARTS: [&str; 10] = ["A", "B", "C", "D", "E", "F", "G", "P", "Q", "R"];

/// A stand-in for the CKM graphon: parts `Ã..F̃, G̃, P̃` of measure 1/14,
/// `Q̃` of measure 5/14 and `R̃` of measure 1/14; `W_F` on `G̃×G̃`, the half
/// graphon on `G̃×P̃`, zero elsewhere. It is not finitely forcible.
#[derive(Clone, Debug)]
pub struct MockCkm {
    pub kernel: Arc<TiledGraphon>,
    /// Average degree of each part.
    pub degrees: Vec<(String, f64)>,
}

pub fn mock_ckm(wf: &StepGraphon) -> Result<MockCkm> {
    let mut lo = rat(0, 1);
    let parts: Vec<NamedPart> = CKM_PARTS
        .iter()
        .map(|&name| {
            let len = rat(if name == "Q" { 5 } else { 1 }, 14);
            let hi = &lo + &len;
            let iv = Interval::new(lo.clone(), hi.clone());
            lo = hi;
            iv.map(|interval| NamedPart {
                name: name.to_string(),
                interval,
            })
        })
        .collect::<Result<_>>()?;
    let kernel = TiledGraphon::new(
        parts,
        vec![
            TileSpec::new(6..7, 6..7, Arc::new(wf.clone())),
            TileSpec::new(6..7, 7..8, Arc::new(HalfGraphon)),
        ],
    )?;
    let degrees = kernel
        .parts()
        .iter()
        .map(|p| {
            let (a, b) = (p.interval.lo_f(), p.interval.hi_f());
            (p.name.clone(), kernel.rect_mass((a, b), (0.0, 1.0)) / (b - a))
        })
        .collect();
    Ok(MockCkm {
        kernel: Arc::new(kernel),
        degrees,
    })
}

impl Kernel for MockCkm {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.kernel.value(x, y)
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.kernel.row_mass(x, lo, hi)
    }
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.kernel.col_mass(y, lo, hi)
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.kernel.rect_mass(x, y)
    }
    fn descriptor(&self) -> Descriptor {
        Descriptor::Tiled
    }
}

impl GraphonKernel for MockCkm {}

/// Range check of the balancing values against `[0, 1]`.
pub fn check_balance(col: &BalanceColumn, names: &[String]) -> Result<()> {
    const SLACK: f64 = 1e-9;
    for (st, name) in col.stats().iter().zip(names) {
        for v in [st.min, st.max] {
            if !(-SLACK..=1.0 + SLACK).contains(&v) {
                return Err(Error::BalanceRange {
                    part: name.clone(),
                    value: v,
                });
            }
        }
    }
    Ok(())
}
