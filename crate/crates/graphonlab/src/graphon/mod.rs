//! Kernels on [0,1)² and the concrete graphon families.

mod checker;
mod interval;
mod step;
mod tiled;

use std::fmt;

pub use checker::{checker_graphon, checker_level, CheckerGraphon, CheckerLevel, DEFAULT_DEPTH};
pub use interval::{dyadic_interval, gamma_map, DyadicIndex, GammaMap, Interval};
pub use step::{step_graphon, RealStep, StepGraphon};
pub use tiled::{tiled_graphon, NamedPart, TileSpec, TiledGraphon};

#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Step,
    Half,
    Checker(u32),
    Constant(f64),
    Tiled,
    Composite,
}

/// A measurable function on [0,1)² with values in [0,1], not necessarily
/// symmetric. Tiles of a tiled graphon are kernels.
pub trait Kernel: Send + Sync + fmt::Debug {
    fn value(&self, x: f64, y: f64) -> f64;

    /// `∫_lo^hi value(x, y) dy`.
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64;

    /// `∫_lo^hi value(x, y) dx`.
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64;

    /// `∫∫ value` over a rectangle; midpoint rule over rows unless overridden.
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        midpoint(x, 2048, |t| self.row_mass(t, y.0, y.1))
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Composite
    }

    fn as_step(&self) -> Option<&StepGraphon> {
        None
    }
}

/// A symmetric kernel.
pub trait GraphonKernel: Kernel {
    fn degree(&self, x: f64) -> f64 {
        self.row_mass(x, 0.0, 1.0)
    }
}

pub(crate) fn midpoint(range: (f64, f64), n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = range;
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

pub(crate) fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantKernel(pub f64);

impl ConstantKernel {
    pub fn new(c: f64) -> crate::Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(crate::Error::Range(c.to_string()));
        }
        Ok(ConstantKernel(c))
    }
}

impl Kernel for ConstantKernel {
    fn value(&self, _: f64, _: f64) -> f64 {
        self.0
    }
    fn row_mass(&self, _: f64, lo: f64, hi: f64) -> f64 {
        self.0 * (hi - lo).max(0.0)
    }
    fn col_mass(&self, _: f64, lo: f64, hi: f64) -> f64 {
        self.0 * (hi - lo).max(0.0)
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.0 * (x.1 - x.0).max(0.0) * (y.1 - y.0).max(0.0)
    }
    fn descriptor(&self) -> Descriptor {
        Descriptor::Constant(self.0)
    }
}

impl GraphonKernel for ConstantKernel {}

/// `W(x,y) = 1` iff `x + y >= 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HalfGraphon;

pub fn half_graphon() -> HalfGraphon {
    HalfGraphon
}

impl Kernel for HalfGraphon {
    fn value(&self, x: f64, y: f64) -> f64 {
        if x + y >= 1.0 {
            1.0
        } else {
            0.0
        }
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        overlap(1.0 - x, f64::INFINITY, lo, hi)
    }
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.row_mass(y, lo, hi)
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        // row_mass is piecewise linear in x with kinks at 1-y.1 and 1-y.0
        let mut pts = vec![x.0, x.1];
        for k in [1.0 - y.1, 1.0 - y.0] {
            if k > x.0 && k < x.1 {
                pts.push(k);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.row_mass(w[0], y.0, y.1) + self.row_mass(w[1], y.0, y.1)))
            .sum()
    }
    fn descriptor(&self) -> Descriptor {
        Descriptor::Half
    }
}

impl GraphonKernel for HalfGraphon {}
