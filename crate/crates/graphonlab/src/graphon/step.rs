//! Step graphons with exact rational measures and block values.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{overlap, Descriptor, GraphonKernel, Interval, Kernel};
use crate::error::{Error, Result};
use crate::rational::{self, to_f64, Rational};

#[derive(Clone, Debug)]
pub struct StepGraphon {
    measures: Vec<Rational>,
    values: Vec<Vec<Rational>>,
    bounds_f: Vec<f64>,
    measures_f: Vec<f64>,
    values_f: Vec<f64>,
}

impl PartialEq for StepGraphon {
    fn eq(&self, other: &Self) -> bool {
        self.measures == other.measures && self.values == other.values
    }
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    measures: Vec<String>,
    values: Vec<Vec<String>>,
}

pub fn step_graphon(measures: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<StepGraphon> {
    StepGraphon::new(measures, values)
}

impl StepGraphon {
    pub fn new(measures: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<Self> {
        let k = measures.len();
        if k == 0 {
            return Err(Error::MeasureSum("0 (no parts)".into()));
        }
        if let Some(m) = measures.iter().find(|m| !m.is_positive()) {
            return Err(Error::Range(format!("part measure {}", rational::format(m))));
        }
        let total: Rational = measures.iter().sum();
        if !total.is_one() {
            return Err(Error::MeasureSum(rational::format(&total)));
        }
        if values.len() != k || values.iter().any(|row| row.len() != k) {
            return Err(Error::Size(format!("value matrix must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                if !rational::in_unit(&values[i][j]) {
                    return Err(Error::Range(rational::format(&values[i][j])));
                }
                if j > i && values[i][j] != values[j][i] {
                    return Err(Error::Asymmetry(i, j));
                }
            }
        }
        let mut bounds_f = Vec::with_capacity(k + 1);
        let mut acc = Rational::zero();
        bounds_f.push(0.0);
        for m in &measures[..k - 1] {
            acc += m;
            bounds_f.push(to_f64(&acc));
        }
        bounds_f.push(1.0);
        let measures_f = measures.iter().map(to_f64).collect();
        let values_f = values.iter().flatten().map(to_f64).collect();
        Ok(StepGraphon {
            measures,
            values,
            bounds_f,
            measures_f,
            values_f,
        })
    }

    /// Constant graphon with one part.
    pub fn constant(c: Rational) -> Result<Self> {
        Self::new(vec![Rational::one()], vec![vec![c]])
    }

    pub fn parts(&self) -> usize {
        self.measures.len()
    }

    pub fn measures(&self) -> &[Rational] {
        &self.measures
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn measure(&self, i: usize) -> &Rational {
        &self.measures[i]
    }

    pub fn block(&self, i: usize, j: usize) -> &Rational {
        &self.values[i][j]
    }

    pub fn measure_f(&self, i: usize) -> f64 {
        self.measures_f[i]
    }

    pub fn block_f(&self, i: usize, j: usize) -> f64 {
        self.values_f[i * self.parts() + j]
    }

    pub fn part_of(&self, x: f64) -> usize {
        let k = self.parts();
        self.bounds_f[1..k].partition_point(|&b| b <= x)
    }

    pub fn part_interval(&self, i: usize) -> Interval {
        let lo: Rational = self.measures[..i].iter().sum();
        let hi = &lo + &self.measures[i];
        Interval::new(lo, hi).expect("positive part")
    }

    pub fn part_bounds_f(&self) -> &[f64] {
        &self.bounds_f
    }

    /// Exact degree of every part.
    pub fn degrees(&self) -> Vec<Rational> {
        (0..self.parts())
            .map(|i| {
                self.values[i]
                    .iter()
                    .zip(&self.measures)
                    .map(|(v, m)| v * m)
                    .sum()
            })
            .collect()
    }

    /// Relabel parts: part `i` of the result is part `order[i]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.parts()];
        if order.len() != self.parts() {
            return Err(Error::Size("permutation length".into()));
        }
        for &o in order {
            if o >= self.parts() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Index(format!("permutation entry {o}")));
            }
        }
        let measures = order.iter().map(|&o| self.measures[o].clone()).collect();
        let values = order
            .iter()
            .map(|&a| order.iter().map(|&b| self.values[a][b].clone()).collect())
            .collect();
        Self::new(measures, values)
    }

    pub fn to_real(&self) -> RealStep {
        RealStep {
            measures: self.measures_f.clone(),
            values: self.values_f.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = StepDoc {
            measures: self.measures.iter().map(rational::format).collect(),
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(rational::format).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("serializable")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("valid json")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: StepDoc = serde_json::from_str(s)?;
        Self::from_doc(doc)
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let doc: StepDoc = serde_json::from_value(v.clone())?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: StepDoc) -> Result<Self> {
        let measures = doc
            .measures
            .iter()
            .map(|s| rational::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let values = doc
            .values
            .iter()
            .map(|r| r.iter().map(|s| rational::parse(s)).collect())
            .collect::<Result<Vec<_>>>()?;
        Self::new(measures, values)
    }

    /// Average of a kernel over an `n×n` grid of equal cells, evaluated at
    /// `q×q` interior points per cell.
    pub fn grid_average(w: &dyn Kernel, n: usize, q: usize) -> Result<Self> {
        let mut vals = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for a in 0..q {
                    for b in 0..q {
                        let x = (i as f64 + (a as f64 + 0.5) / q as f64) / n as f64;
                        let y = (j as f64 + (b as f64 + 0.5) / q as f64) / n as f64;
                        acc += w.value(x, y);
                    }
                }
                let v = rational::from_f64((acc / (q * q) as f64).clamp(0.0, 1.0))?;
                vals[i][j] = v.clone();
                vals[j][i] = v;
            }
        }
        let m = Rational::new(1.into(), (n as i64).into());
        Self::new(vec![m; n], vals)
    }
}

impl Kernel for StepGraphon {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.block_f(self.part_of(x), self.part_of(y))
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let i = self.part_of(x);
        (0..self.parts())
            .map(|j| self.block_f(i, j) * overlap(self.bounds_f[j], self.bounds_f[j + 1], lo, hi))
            .sum()
    }
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.row_mass(y, lo, hi)
    }
    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        let k = self.parts();
        let mut s = 0.0;
        for i in 0..k {
            let ox = overlap(self.bounds_f[i], self.bounds_f[i + 1], x.0, x.1);
            if ox == 0.0 {
                continue;
            }
            for j in 0..k {
                s += ox * self.block_f(i, j) * overlap(self.bounds_f[j], self.bounds_f[j + 1], y.0, y.1);
            }
        }
        s
    }
    fn descriptor(&self) -> Descriptor {
        Descriptor::Step
    }
    fn as_step(&self) -> Option<&StepGraphon> {
        Some(self)
    }
}

impl GraphonKernel for StepGraphon {}

/// Step graphon in double precision, used inside numeric solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct RealStep {
    pub measures: Vec<f64>,
    /// Row-major `k×k`.
    pub values: Vec<f64>,
}

impl RealStep {
    pub fn parts(&self) -> usize {
        self.measures.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.parts() + j]
    }

    /// Exact rational copy; the last measure absorbs rounding so the sum is 1.
    pub fn to_exact(&self) -> Result<StepGraphon> {
        let k = self.parts();
        let mut measures = Vec::with_capacity(k);
        for m in &self.measures[..k - 1] {
            measures.push(rational::from_f64(*m)?);
        }
        let rest = Rational::one() - measures.iter().sum::<Rational>();
        measures.push(rest);
        let values = (0..k)
            .map(|i| (0..k).map(|j| rational::from_f64(self.value(i, j))).collect())
            .collect::<Result<Vec<_>>>()?;
        StepGraphon::new(measures, values)
    }
}
